#!/usr/bin/env python3
"""Startup script for orbitlab."""

import sys
import logging
import platform
import asyncio
import orbit_cli

if __name__ == "__main__":
    try:
        # Ensure proper event loop on Windows
        if platform.system() == "Windows":
            asyncio.set_event_loop_policy(asyncio.WindowsProactorEventLoopPolicy())

        sys.exit(asyncio.run(orbit_cli.main(sys.argv[1:])))

    except KeyboardInterrupt:
        print("\norbitlab interrupted by user")
        sys.exit(0)
    except Exception as e:
        print(f"Failed to start orbitlab: {e}")
        logging.error(f"Startup error: {e}", exc_info=True)
        sys.exit(3)
