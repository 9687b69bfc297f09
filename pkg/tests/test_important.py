def test_import():
    import crossflow  # noqa: F401

    assert crossflow.__version__
