"""Test package for the GC simulator."""
