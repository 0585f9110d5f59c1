# Tests for dyncoh
