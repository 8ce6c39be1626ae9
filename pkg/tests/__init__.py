"""Test suite for srpsim."""
