#!/usr/bin/env python3
"""
webdamlog-acl - multi-peer WebdamLog simulator with access control
Main entry point for the application
"""

import sys

from src.cli.commands import main

if __name__ == "__main__":
    sys.exit(main())
