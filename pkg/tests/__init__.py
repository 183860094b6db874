"""Test suite for the tree homomorphism toolkit."""
