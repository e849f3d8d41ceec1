"""
Main entry point for stockpile_tracker
"""

from .cli import main

if __name__ == "__main__":
    main()
