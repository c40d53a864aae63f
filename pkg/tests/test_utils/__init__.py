"""
Test suite for the utils module.
"""
