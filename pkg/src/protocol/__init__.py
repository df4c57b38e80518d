"""Principals, channels and the scenario runner"""
