from htt.typecheck import base_signature, check_source


def load(text, sig=None, path="<test>"):
    """Check ``text`` on top of ``sig`` (default: built-ins); fail loudly on diagnostics."""
    rep = check_source(sig if sig is not None else base_signature(), text, path)
    assert rep.ok, [str(d) for d in rep.diagnostics]
    return rep.signature


def diagnose(text, sig=None, path="<test>"):
    return check_source(sig if sig is not None else base_signature(), text, path).diagnostics
