"""Utilities: error handling and plotting."""
