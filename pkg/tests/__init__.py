"""Signed graph sampling tests"""
