"""Test suite for netscale."""
