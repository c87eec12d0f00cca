"""Execution services: concurrent sample evaluation and reproductions."""
