"""
Command line subcommands
"""
