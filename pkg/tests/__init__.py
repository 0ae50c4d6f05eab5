"""Tests for quality-verify."""
