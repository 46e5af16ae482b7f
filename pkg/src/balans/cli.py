"""Command-line front end.

Subcommands parse a substitution or directive spec, run the corresponding
analysis and print a human-readable report or a JSON document; certificates
round-trip through files and `verify`.  Everything is deterministic for
fixed inputs.
"""
from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from pathlib import Path

from . import __version__
from .balance import (
    balance_profile,
    factor_frequencies,
    letter_frequencies,
)
from .certificates import (
    ImbalanceCertificate,
    divisibility_certificate,
    potential_test,
    spectral_balance_report,
    verify_certificate,
)
from .dendric import (
    DirectiveSequence,
    ar_run_bound,
    arnoux_rauzy_word,
    cylinder_decomposition,
    dendric_check,
    worker_count,
)
from .linalg import char_poly
from .substitution import (
    Substitution,
    is_primitive,
    language_cache,
    substitution_matrix,
    two_block_substitution,
)
from .words import Word
from .balance import _profile_from_text, admissible_level


def _load_spec(arg: str) -> str:
    path = Path(arg)
    if path.is_file():
        return path.read_text()
    return arg


def _rational(x) -> object:
    if isinstance(x, Fraction):
        return {"p": x.numerator, "q": x.denominator}
    return float(x)


def _frequency_doc(sub: Substitution, table) -> dict:
    return {
        "order": table.order,
        "exact": table.exact,
        "entries": {
            sub.alphabet.format_word(w): _rational(x)
            for w, x in sorted(table.entries.items())
        },
    }


# ---------------------------------------------------------------------------
# per-pattern classification shared by analyze and certify

def _classify_pattern(sub: Substitution, v: Word, spectral_verdict: str) -> dict:
    doc: dict = {"pattern": sub.alphabet.format_word(v)}
    if spectral_verdict == "balanced-certified":
        doc["verdict"] = "balanced-certified"
        doc["note"] = "Pisot spectrum; frequency is an additive topological eigenvalue"
        return doc
    table = factor_frequencies(sub, len(v))
    if not table.exact:
        doc["verdict"] = "inconclusive"
        doc["note"] = "frequency not certified rational; divisibility and potential tests unavailable"
        return doc
    cert = divisibility_certificate(sub, v, frequencies=table)
    if cert is not None:
        doc["verdict"] = "unbalanced-certified"
        doc["certificate"] = cert.to_dict()
        return doc
    result = potential_test(sub, v, frequencies=table)
    if not result.consistent:
        doc["verdict"] = "unbalanced-certified"
        doc["certificate"] = result.certificate.to_dict()
        return doc
    doc["verdict"] = "inconclusive"
    doc["note"] = "divisibility holds on every witness and a letter potential exists"
    doc["potentials"] = result.potentials
    return doc


def _cmd_analyze(args) -> dict:
    sub = Substitution.parse(_load_spec(args.spec))
    primitive, witness = is_primitive(sub)
    if not primitive:
        raise ValueError("substitution is not primitive")
    matrix = substitution_matrix(sub)
    block_sub, coding = two_block_substitution(sub)
    spectral = spectral_balance_report(sub)
    letters_table = letter_frequencies(sub)
    factors_table = factor_frequencies(sub, 2)
    letter_patterns = [(a,) for a in range(len(sub.alphabet))]
    factor_patterns = list(coding.blocks)

    def classify_letter(v):
        return _classify_pattern(sub, v, spectral.letters_verdict)

    def classify_factor(v):
        return _classify_pattern(sub, v, spectral.factors_verdict)

    patterns = letter_patterns + factor_patterns
    with ThreadPoolExecutor(max_workers=worker_count(len(patterns))) as pool:
        letter_docs = list(pool.map(classify_letter, letter_patterns))
        factor_docs = list(pool.map(classify_factor, factor_patterns))
    warnings = []
    if spectral.letters_verdict == "inconclusive":
        warnings.append("letters: inconclusive by spectrum (root of unity present)")
    if spectral.factors_verdict == "inconclusive":
        warnings.append("factors: inconclusive by spectrum (root of unity present)")
    return {
        "command": "analyze",
        "substitution": str(sub),
        "primitive": {"ok": True, "witness_exponent": witness},
        "char_poly": {
            "letters": list(char_poly(matrix)),
            "two_block": list(char_poly(substitution_matrix(block_sub))),
        },
        "spectral": {
            "letters": {
                "classification": spectral.letters_class.value,
                "verdict": spectral.letters_verdict,
            },
            "factors": {
                "classification": spectral.factors_class.value,
                "verdict": spectral.factors_verdict,
            },
        },
        "frequencies": {
            "letters": _frequency_doc(sub, letters_table),
            "two_block": _frequency_doc(sub, factors_table),
        },
        "letters": letter_docs,
        "two_block_factors": factor_docs,
        "warnings": warnings,
    }


def _cmd_certify(args) -> dict:
    sub = Substitution.parse(_load_spec(args.spec))
    v = sub.alphabet.parse_word(args.pattern)
    if not language_cache(sub).contains(v):
        raise ValueError("pattern not in language")
    table = factor_frequencies(sub, len(v))
    doc: dict = {
        "command": "certify",
        "substitution": str(sub),
        "pattern": args.pattern,
        "threshold_level": admissible_level(sub, v),
    }
    if not table.exact:
        spectral = spectral_balance_report(sub)
        doc["verdict"] = "inconclusive"
        doc["note"] = (
            "frequency not certified rational; spectrum "
            f"{spectral.letters_verdict} on letters"
        )
        return doc
    mu = table.rational(v)
    doc["frequency"] = {"p": mu.numerator, "q": mu.denominator}
    cert = divisibility_certificate(sub, v, frequencies=table)
    if cert is None:
        result = potential_test(
            sub, v, level=args.level, frequencies=table
        )
        if result.consistent:
            spectral = spectral_balance_report(sub)
            doc["verdict"] = "no certificate found"
            doc["note"] = (
                f"spectrum {spectral.letters_verdict} on letters, "
                f"{spectral.factors_verdict} on factors"
            )
            doc["potentials"] = result.potentials
            return doc
        cert = result.certificate
    doc["verdict"] = "unbalanced-certified"
    doc["certificate"] = cert.to_dict()
    if args.out:
        Path(args.out).write_text(cert.to_json() + "\n")
        doc["written"] = args.out
    return doc


def _cmd_verify(args) -> dict:
    text = Path(args.certificate).read_text()
    cert = ImbalanceCertificate.from_json(text)
    ok, reason = verify_certificate(cert)
    return {
        "command": "verify",
        "certificate": args.certificate,
        "valid": ok,
        "reason": reason,
    }


def _cmd_balance(args) -> dict:
    sub = Substitution.parse(_load_spec(args.spec))
    v = sub.alphabet.parse_word(args.pattern)
    profile = balance_profile(sub, v, args.N, args.L, stride=args.stride)
    doc = {
        "command": "balance",
        "substitution": str(sub),
        "pattern": args.pattern,
        "horizon": profile.horizon,
        "generated_length": profile.generated_length,
        "stride": profile.stride,
        "max_value": profile.max_value,
        "values": list(profile.values),
    }
    if args.csv:
        _write_csv(args.csv, profile.values)
        doc["csv"] = args.csv
    return doc


def _write_csv(path: str, values) -> None:
    with open(path, "w") as fh:
        fh.write("n,balance\n")
        for n, b in enumerate(values, start=1):
            fh.write(f"{n},{b}\n")


def _cmd_dendric(args) -> dict:
    sub = Substitution.parse(_load_spec(args.spec))
    report = dendric_check(sub, args.max_len)
    return {
        "command": "dendric",
        "substitution": str(sub),
        "max_length": report.max_length,
        "overall": report.overall,
        "note": "finite-length screen, not a proof of dendricity",
        "failures": [sub.alphabet.format_word(w) for w in report.failures],
        "checked": len(report.verdicts),
    }


def _cmd_decompose(args) -> dict:
    sub = Substitution.parse(_load_spec(args.spec))
    v = sub.alphabet.parse_word(args.pattern)
    lang = language_cache(sub)
    dec = cylinder_decomposition(lang, v)
    return {
        "command": "decompose",
        "substitution": str(sub),
        "pattern": args.pattern,
        "terms": dec.to_json_terms(sub.alphabet),
    }


def _cmd_ar(args) -> dict:
    directive = DirectiveSequence.parse(_load_spec(args.directive))
    word = arnoux_rauzy_word(directive, args.length)[: args.length]
    doc: dict = {
        "command": "ar",
        "directive": str(directive),
        "length": int(len(word)),
    }
    if directive.size == 3:
        h = ar_run_bound(directive)
        doc["run_bound"] = h
        doc["balance_bound"] = 2 * h + 1
    if args.probe_letters:
        probes = {}
        for a in range(directive.size):
            profile = _profile_from_text(word, (a,), args.N)
            probes[str(a + 1)] = profile.max_value
        doc["letter_balance"] = probes
        doc["max_letter_balance"] = max(probes.values())
        if args.csv:
            profile = _profile_from_text(word, (0,), args.N)
            _write_csv(args.csv, profile.values)
            doc["csv"] = args.csv
    return doc


# ---------------------------------------------------------------------------
# rendering

def _print_human(doc: dict) -> None:
    command = doc.get("command")
    if command == "analyze":
        print(f"substitution   {doc['substitution']}")
        print(f"primitive      yes (M^{doc['primitive']['witness_exponent']} > 0)")
        print(f"char poly      letters {doc['char_poly']['letters']}")
        print(f"               2-block {doc['char_poly']['two_block']}")
        print(f"spectral       letters: {doc['spectral']['letters']['verdict']}"
              f" ({doc['spectral']['letters']['classification']})")
        print(f"               factors: {doc['spectral']['factors']['verdict']}"
              f" ({doc['spectral']['factors']['classification']})")
        for scope in ("letters", "two_block_factors"):
            print(f"{scope}:")
            for item in doc[scope]:
                line = f"  {item['pattern']:>6}  {item['verdict']}"
                if "certificate" in item:
                    line += f"  [{item['certificate']['kind']}]"
                print(line)
        for w in doc.get("warnings", []):
            print(f"warning: {w}")
    elif command == "certify":
        print(f"substitution   {doc['substitution']}")
        print(f"pattern        {doc['pattern']}")
        print(f"verdict        {doc['verdict']}")
        if "certificate" in doc:
            cert = doc["certificate"]
            print(f"kind           {cert['kind']}")
            print(f"witness        {cert['witness']}")
            if cert.get("modular"):
                print(f"modular        {cert['modular']}")
            if cert.get("cycle"):
                print(f"cycle          {cert['cycle']}")
        if "note" in doc:
            print(f"note           {doc['note']}")
    elif command == "verify":
        print(f"certificate    {doc['certificate']}")
        print(f"valid          {doc['valid']}")
        print(f"reason         {doc['reason']}")
    elif command == "balance":
        print(f"substitution   {doc['substitution']}")
        print(f"pattern        {doc['pattern']}")
        print(f"scanned        {doc['generated_length']} symbols, "
              f"windows up to {doc['horizon']}")
        print(f"max balance    {doc['max_value']}")
    elif command == "dendric":
        print(f"substitution   {doc['substitution']}")
        verdict = "all trees" if doc["overall"] else f"fails at {doc['failures'][:4]}"
        print(f"screen <= {doc['max_length']}   {verdict} ({doc['checked']} graphs; "
              "finite screen)")
    elif command == "decompose":
        print(f"substitution   {doc['substitution']}")
        print(f"pattern        {doc['pattern']}")
        for term in doc["terms"]:
            print(f"  letter {term['letter']}  shift {term['shift']:+d}  "
                  f"coeff {term['coeff']:+d}")
    elif command == "ar":
        print(f"directive      {doc['directive']}")
        print(f"generated      {doc['length']} symbols")
        if "balance_bound" in doc:
            print(f"run bound      h = {doc['run_bound']} "
                  f"(predicted letter balance <= {doc['balance_bound']})")
        if "letter_balance" in doc:
            print(f"letter balance {doc['letter_balance']}"
                  f" (max {doc['max_letter_balance']})")
    else:
        print(json.dumps(doc, indent=2, sort_keys=True))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="balans",
        description="balancedness analysis for substitution subshifts and dendric words",
    )
    parser.add_argument("--version", action="version", version=f"balans {__version__}")
    subparsers = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--json", action="store_true", help="emit a JSON report")
        p.add_argument("--out", help="also write the JSON report to this path")

    p = subparsers.add_parser("analyze", help="one-shot balancedness dossier")
    p.add_argument("spec", help="substitution spec string or file")
    common(p)

    p = subparsers.add_parser("certify", help="search for an imbalance certificate")
    p.add_argument("spec")
    p.add_argument("--pattern", required=True)
    p.add_argument("--level", type=int, default=None,
                   help="partition level for the potential test (default: threshold)")
    common(p)

    p = subparsers.add_parser("verify", help="re-check a stored certificate")
    p.add_argument("certificate", help="certificate JSON file")
    common(p)

    p = subparsers.add_parser("balance", help="sliding-window balance profile")
    p.add_argument("spec")
    p.add_argument("--pattern", required=True)
    p.add_argument("--N", type=int, default=512, help="largest window length")
    p.add_argument("--L", type=int, default=1 << 20, help="generated text length")
    p.add_argument("--stride", type=int, default=1)
    p.add_argument("--csv", help="write the profile series as CSV")
    common(p)

    p = subparsers.add_parser("dendric", help="extension-graph tree screen")
    p.add_argument("spec")
    p.add_argument("--max-len", type=int, default=8)
    common(p)

    p = subparsers.add_parser("decompose", help="cylinder decomposition of a pattern")
    p.add_argument("spec")
    p.add_argument("--pattern", required=True)
    common(p)

    p = subparsers.add_parser("ar", help="Arnoux-Rauzy word generation and probes")
    p.add_argument("directive", help="directive spec, e.g. 'd=3; period=1,2,3'")
    p.add_argument("--length", type=int, default=1 << 16)
    p.add_argument("--probe-letters", action="store_true")
    p.add_argument("--N", type=int, default=512)
    p.add_argument("--csv")
    common(p)
    return parser


_HANDLERS = {
    "analyze": _cmd_analyze,
    "certify": _cmd_certify,
    "verify": _cmd_verify,
    "balance": _cmd_balance,
    "dendric": _cmd_dendric,
    "decompose": _cmd_decompose,
    "ar": _cmd_ar,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        doc = _HANDLERS[args.command](args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if getattr(args, "out", None) and args.command != "certify":
        Path(args.out).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    if getattr(args, "json", False):
        print(json.dumps(doc, indent=2, sort_keys=True))
    else:
        _print_human(doc)
    if args.command == "verify" and not doc["valid"]:
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
