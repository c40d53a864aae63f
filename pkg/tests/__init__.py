"""
Test suite for the classrbm package.
"""
