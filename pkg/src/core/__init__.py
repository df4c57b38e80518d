"""Bit strings, keys, verification rules and shared infrastructure"""
