"""Test suite."""