"""
Structured verdicts of checks and whole scenario runs, and their two
serializations: a canonical yaml tree and a flat csv table.
"""
import csv
import io
import os

import yaml

from consistlib import assertion, constants, logutil, util

logger = logutil.getLogger(__name__)


def _plain(v):
    """numpy scalars and arrays as yaml-safe python values"""
    if hasattr(v, "tolist"):
        return v.tolist()
    return v


class CheckReport(object):
    """Verdict of one check plus every number that went into it.

    Sub-assertions are recorded with `require`; a failed one makes the
    verdict FAIL. `uncertified` marks the report INCONCLUSIVE unless
    something already failed.
    """

    def __init__(self, name, seed=None):
        self.name = name
        self.seed = seed
        self.constants = {}
        self.tolerances = {}
        self.worst_cases = []
        self.notes = []
        self.failures = []
        self.uncertain = []
        self.elapsed = None
        self._verdict = None

    def measure(self, name, value, tolerance=None):
        self.constants[name] = float(value)
        if tolerance is not None:
            self.tolerances[name] = float(tolerance)
        return value

    def require(self, name, value, bound, tol, relation="<="):
        """Record `value <relation> bound` up to tol; returns whether it held"""
        self.measure(name, value, tol)
        if relation == "<=":
            ok = value <= bound + tol
        elif relation == ">=":
            ok = value >= bound - tol
        else:
            raise ValueError("relation must be '<=' or '>='")
        if not ok:
            self.failures.append("{}={} violates {} {} (tol {})".format(
                name, util.format_number(value), relation, util.format_number(bound), util.format_number(tol)))
        return ok

    def fail(self, reason):
        self.failures.append(reason)

    def uncertified(self, reason):
        self.uncertain.append(reason)

    def note(self, text):
        self.notes.append(text)

    def worst(self, **sample):
        self.worst_cases.append({k: _plain(v) for k, v in sample.items()})

    @property
    def verdict(self):
        if self._verdict is not None:
            return self._verdict
        if self.failures:
            return constants.VERDICT_FAIL
        if self.uncertain:
            return constants.VERDICT_INCONCLUSIVE
        return constants.VERDICT_PASS

    @verdict.setter
    def verdict(self, value):
        if value not in constants.VERDICTS:
            raise ValueError("unknown verdict {!r}".format(value))
        self._verdict = value

    @property
    def passed(self):
        return self.verdict == constants.VERDICT_PASS

    def to_dict(self):
        d = {
            "name": self.name,
            "verdict": self.verdict,
            "seed": self.seed,
            "constants": dict(self.constants),
            "tolerances": dict(self.tolerances),
        }
        if self.worst_cases:
            d["worst_cases"] = self.worst_cases
        if self.failures:
            d["failures"] = list(self.failures)
        if self.uncertain:
            d["inconclusive"] = list(self.uncertain)
        if self.notes:
            d["notes"] = list(self.notes)
        if self.elapsed is not None:
            d["elapsed_seconds"] = round(self.elapsed, 3)
        return d

    def __repr__(self):
        return "<CheckReport {} {}>".format(self.name, self.verdict)


class RunReport(object):
    def __init__(self, scenario_name, digest, version, seed=None):
        self.scenario = scenario_name
        self.digest = digest
        self.version = version
        self.seed = seed
        self.checks = []
        self.elapsed = None

    def add(self, check_report):
        self.checks.append(check_report)

    @property
    def exit_code(self):
        """0 when every check passed, 1 on any failure, otherwise 2 on any inconclusive"""
        verdicts = {c.verdict for c in self.checks}
        if constants.VERDICT_FAIL in verdicts:
            return constants.EXIT_FAIL
        if constants.VERDICT_INCONCLUSIVE in verdicts:
            return constants.EXIT_INCONCLUSIVE
        return constants.EXIT_PASS

    def summary(self):
        counts = {v: 0 for v in constants.VERDICTS}
        for c in self.checks:
            counts[c.verdict] += 1
        return counts

    def to_dict(self):
        return {
            "scenario": self.scenario,
            "digest": self.digest,
            "version": self.version,
            "seed": self.seed,
            "note": constants.FINITE_DIMENSION_NOTE,
            "summary": self.summary(),
            "checks": [c.to_dict() for c in self.checks],
            "elapsed_seconds": None if self.elapsed is None else round(self.elapsed, 3),
        }

    def table_rows(self):
        for c in self.checks:
            for name, value in c.constants.items():
                tol = c.tolerances.get(name)
                yield [
                    self.scenario, c.name, c.verdict, name,
                    util.format_number(value),
                    "" if tol is None else util.format_number(tol),
                    "" if c.seed is None else str(c.seed),
                ]


def render_table(report):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(constants.TABLE_HEADER)
    for row in report.table_rows():
        writer.writerow(row)
    return buf.getvalue()


def render_tree(report):
    return yaml.safe_dump(report.to_dict(), default_flow_style=False, sort_keys=True)


def emit_report(report, formats, out_dir):
    """Write the requested serializations of a RunReport into out_dir.

    :param report: completed RunReport
    :param formats: iterable drawn from constants.REPORT_FORMATS
    :param out_dir: directory, created when missing
    :return: list of written paths
    :raises PermissionError: when out_dir cannot be written
    """
    assertion.writable_dir(out_dir, "Report output directory is not writable")
    written = []
    for fmt in formats:
        if fmt == "tree":
            path = os.path.join(out_dir, "{}.report.yml".format(report.scenario))
            content = render_tree(report)
        elif fmt == "table":
            path = os.path.join(out_dir, "{}.table.csv".format(report.scenario))
            content = render_table(report)
        else:
            raise ValueError("unknown report format {!r}; choose from {}".format(fmt, ", ".join(constants.REPORT_FORMATS)))
        with open(path, "w") as f:
            f.write(content)
        logger.info("Wrote %s report to %s", fmt, path)
        written.append(path)
    return written
