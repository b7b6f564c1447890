"""
Command modules for the tandemcal CLI.
"""
# Commands are imported in app.py to register them
