import doctest

import pytest

from ibltstash import signed, sketch


@pytest.mark.parametrize("module", [sketch, signed])
def test_module_examples(module):
    result = doctest.testmod(module)
    assert result.attempted > 0 and result.failed == 0
