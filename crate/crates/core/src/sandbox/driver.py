import ast
import contextlib
import io
import json
import linecache
import sys
import traceback

_CANDIDATE = json.loads(__CANDIDATE_JSON__)
_CASES = json.loads(__CASES_JSON__)
_ENTRY = json.loads(__ENTRY_JSON__)

_out = sys.stdout
_sink = io.StringIO()
_traced = [False]
_MISSING = object()


def _report(index, ok):
    _out.write("CASE %d %s\n" % (index, "PASS" if ok else "FAIL"))
    _out.flush()


def _trace(text):
    if _traced[0]:
        return
    _traced[0] = True
    sys.stderr.write(text if text.endswith("\n") else text + "\n")
    sys.stderr.flush()


def _format_exc():
    etype, value, tb = sys.exc_info()
    frames = [f for f in traceback.extract_tb(tb) if not f.filename.endswith("harness.py")]
    lines = []
    if frames:
        lines.append("Traceback (most recent call last):\n")
        lines.extend(traceback.format_list(frames))
    lines.extend(traceback.format_exception_only(etype, value))
    return "".join(lines)


def _register(name, source):
    linecache.cache[name] = (len(source), None, source.splitlines(True), name)


def _same(got, expected):
    text = expected.strip()
    try:
        want = ast.literal_eval(text)
    except Exception:
        want = _MISSING
    if want is not _MISSING:
        try:
            if got == want:
                return True
        except Exception:
            pass
    return str(got).strip() == text or repr(got).strip() == text


def _call_source(src):
    tree = ast.parse(src, mode="eval")
    direct = isinstance(tree.body, ast.Call) and (
        not _ENTRY or (isinstance(tree.body.func, ast.Name) and tree.body.func.id == _ENTRY)
    )
    if direct or not _ENTRY:
        return src
    return "%s(%s)" % (_ENTRY, src)


def _run(index, case, ns):
    name = "case_%d.py" % index
    mode = case["mode"]
    if mode == "assert_expr":
        if _ENTRY and _ENTRY in ns and "candidate" not in ns:
            ns["candidate"] = ns[_ENTRY]
        _register(name, case["input"])
        exec(compile(case["input"], name, "exec"), ns)
        return None
    if mode == "call_compare":
        src = _call_source(case["input"].strip())
        _register(name, src)
        got = eval(compile(src, name, "eval"), ns)
        if _same(got, case["expected"]):
            return None
        return "AssertionError: case %d: %s returned %r, expected %s" % (index, src, got, case["expected"].strip())
    got = ns[_ENTRY](case["input"])
    if str(got).rstrip() == case["expected"].rstrip():
        return None
    return "AssertionError: case %d: input %r returned %r, expected %r" % (index, case["input"], got, case["expected"])


def _main():
    ns = {"__name__": "solution"}
    _register("solution.py", _CANDIDATE)
    try:
        with contextlib.redirect_stdout(_sink):
            exec(compile(_CANDIDATE, "solution.py", "exec"), ns)
    except BaseException:
        _trace(_format_exc())
        for index in range(1, len(_CASES) + 1):
            _report(index, False)
        sys.exit(1)
    for index, case in enumerate(_CASES, 1):
        try:
            with contextlib.redirect_stdout(_sink):
                mismatch = _run(index, case, ns)
        except KeyboardInterrupt:
            raise
        except BaseException:
            _trace(_format_exc())
            _report(index, False)
            continue
        if mismatch is not None:
            _trace(mismatch)
        _report(index, mismatch is None)


_main()
