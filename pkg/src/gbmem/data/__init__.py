"""Bundled example inputs: code specs, an architecture config, a program."""
