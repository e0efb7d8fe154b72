import ksdiff as kd


def test_hello(capsys):
    kd.hello()
    assert "Version {}".format(kd.__version__) in capsys.readouterr().out


def test_exports():
    """Are the main entry points available from the top level?"""
    assert kd.ks_eval is kd.kilbas_saigo.ks_eval
    assert kd.OU is kd.pearson_spectral.OU
    assert issubclass(kd.exceptions.PoleError, ValueError)
    assert issubclass(kd.exceptions.StepBudgetError, ArithmeticError)


# test_hello()
