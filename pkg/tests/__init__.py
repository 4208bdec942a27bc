"""Test package for segregation-lab."""
