"""
Test suite for Yield Guard Bot
"""
