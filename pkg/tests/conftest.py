import pytest

from scatterkit.library import generate_material_library


@pytest.fixture(scope="session")
def material_library(tmp_path_factory):
    """The bundled suite, generated once per test session."""
    root = tmp_path_factory.mktemp("matlib")
    entries = generate_material_library(root)
    return root, entries
