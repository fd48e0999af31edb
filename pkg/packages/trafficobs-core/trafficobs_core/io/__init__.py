"""Scenario files and report formats."""
