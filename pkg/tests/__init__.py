# Tests for bgwlab
