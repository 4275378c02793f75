import nox


@nox.session(python="3.9")
def tests(session):
    session.install(".[test]")
    session.run("pytest", "-m", "not slow")
    session.run("coverage", "report")
    session.run("coverage", "html")


@nox.session(python="3.9")
def slow(session):
    session.install(".[test]")
    session.run("pytest", "-m", "slow", "--no-cov")
