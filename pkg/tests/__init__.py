"""
Aseo Tests Package
"""
