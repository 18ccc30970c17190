def test_import_package():
    import qsa_lab
    assert hasattr(qsa_lab, "__version__")

def test_import_cli():
    from qsa_lab import cli
    assert hasattr(cli, "main")

def test_benchmarks_ship_with_package():
    from qsa_lab.mdp.model import load_mdp
    assert load_mdp("bench:two_by_two").num_states == 2
