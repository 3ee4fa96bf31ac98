"""Decentralised coordination on planted-solution DCOP instances."""
