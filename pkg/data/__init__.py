"""Data layer: value models and file persistence"""
