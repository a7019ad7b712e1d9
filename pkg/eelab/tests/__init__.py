"""
Testpaket för eelab.
"""
