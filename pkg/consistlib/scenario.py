"""
Scenario files: declarative yaml documents naming spaces, generators, functors,
an optional refinement ladder and a list of checks over them.

    name: minimal
    seed: 7
    generators:
      A: {matrix: [[0, 0], [0, 0]]}
    spaces:
      L2: {kind: lp, p: 2, generator: A}
    checks:
      - {name: law, kind: semigroup_law, generator: A, tol: 1.0e-12}

Everything is resolved at load time so that reference and range errors come
back with the file position of the offending entry.
"""
import glob
import hashlib
import json
import os
import time

import numpy as np
from ruamel.yaml import YAML
from ruamel.yaml.error import MarkedYAMLError

from consistlib import (consistency, constants, elliptic, interp, logutil,
                        semigroup, util, version)
from consistlib.exceptions import (ConsistlabError, DanglingReferenceError,
                                   DimensionMismatchError,
                                   FunctorRefusedError, ParameterRangeError,
                                   ScenarioError)
from consistlib.report import CheckReport, RunReport
from consistlib.spaces import (DiscreteMeasureSpace, DualOf, Intersection,
                               InterpolationCouple, Sum, WeightedLp,
                               dual_sum_identity_check)

logger = logutil.getLogger(__name__)

FIXTURE_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), "fixtures")


def list_fixtures():
    """Names of the scenario files shipped with the package"""
    return sorted(os.path.splitext(os.path.basename(p))[0] for p in glob.glob(os.path.join(FIXTURE_DIR, "*.yml")))


def fixture_path(name):
    path = os.path.join(FIXTURE_DIR, "{}.yml".format(name))
    if not os.path.isfile(path):
        raise ScenarioError("no fixture named '{}'; choose from {}".format(name, ", ".join(list_fixtures())))
    return path


def resolve_path(name_or_path):
    """A scenario file path, or the name of a shipped fixture"""
    if os.path.isfile(name_or_path):
        return name_or_path
    return fixture_path(name_or_path)


def _plain(node):
    if isinstance(node, dict):
        return {str(k): _plain(v) for k, v in node.items()}
    if isinstance(node, (list, tuple)):
        return [_plain(v) for v in node]
    if isinstance(node, bool) or node is None:
        return node
    if isinstance(node, int):
        return int(node)
    if isinstance(node, float):
        return float(node)
    return str(node)


def digest(data):
    """sha256 of the canonical (sorted-key) serialization"""
    canonical = json.dumps(_plain(data), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


class Generator(object):
    """A declared matrix, with its divergence form when built from an elliptic recipe"""

    def __init__(self, name, A, form=None):
        self.name = name
        self.A = util.as_square_matrix(A, what="generator '{}'".format(name))
        self.form = form

    @property
    def dimension(self):
        return self.A.shape[0]

    @property
    def measure(self):
        if self.form is not None:
            return self.form.measure
        return DiscreteMeasureSpace.uniform(self.dimension)


class LadderLevel(object):
    def __init__(self, n, R0, R1):
        self.n = n
        self.R0 = R0
        self.R1 = R1


class CheckSpec(object):
    def __init__(self, name, kind, tol, params, expect_refusal=False, line=None):
        self.name = name
        self.kind = kind
        self.tol = tol
        self.params = params
        self.expect_refusal = expect_refusal
        self.line = line
        self.generators = []
        self.couple = None
        self.target = None
        self.space = None
        self.functor = None
        self.ladder = False

    @property
    def realizations(self):
        """(R0, R1): the declared generators on the endpoints of the couple"""
        A0 = self.generators[0]
        A1 = self.generators[1] if len(self.generators) > 1 else A0
        return (semigroup.GeneratorRealization(A0.A, self.couple.X0, name=A0.name),
                semigroup.GeneratorRealization(A1.A, self.couple.X1, name=A1.name))

    def param(self, key, default=None):
        value = self.params.get(key)
        return default if value is None else value


class Scenario(object):
    def __init__(self, name, seed, path=None, description=None):
        self.name = name
        self.seed = seed
        self.path = path
        self.description = description
        self.digest = None
        self.spaces = {}
        self.generators = {}
        self.functors = {}
        self.ladder = []
        self.checks = []

    def with_seed(self, seed):
        """Same scenario, different base seed (per-check seeds follow)"""
        self.seed = int(seed)
        return self

    def check_seed(self, check):
        return util.derive_seed(self.seed, check.name)

    def __repr__(self):
        return "<Scenario {} checks={} levels={}>".format(self.name, len(self.checks), len(self.ladder))


class _Loader(object):
    def __init__(self, path):
        self.path = path

    def error(self, msg, node=None, key=None):
        line = column = None
        if node is not None and hasattr(node, "lc"):
            try:
                if key is None:
                    line, column = node.lc.line, node.lc.col
                elif isinstance(node, dict):
                    line, column = node.lc.key(key)
                else:
                    line, column = node.lc.item(key)
            except (KeyError, IndexError, TypeError):
                line, column = node.lc.line, node.lc.col
        return ScenarioError(msg, self.path, line, column)

    def dangling(self, name, section, node, key=None):
        err = self.error("", node, key)
        return DanglingReferenceError(name, section, self.path, err.line, err.column)

    def ranged(self, e, node, key=None):
        return self.error("{}={!r} violates constraint {}".format(e.name, e.value, e.constraint), node, key)

    def section(self, data, key, kind=dict):
        value = data.get(key)
        if value is None:
            return kind()
        if not isinstance(value, kind):
            raise self.error("section '{}' must be a {}".format(key, "mapping" if kind is dict else "list"), data, key)
        return value

    def positive(self, value, node, key):
        try:
            value = float(value)
        except (TypeError, ValueError):
            raise self.error("{}={!r} is not a number".format(key, value), node, key)
        if not value > 0:
            raise self.error("{}={!r} violates constraint {} > 0".format(key, value, key), node, key)
        return value

    def ref(self, table, name, section, node, key):
        if name not in table:
            raise self.dangling(name, section, node, key)
        return table[name]

    def load(self):
        try:
            with open(self.path) as f:
                data = YAML(typ="rt").load(f)
        except MarkedYAMLError as e:
            mark = e.problem_mark or e.context_mark
            raise ScenarioError("parse error: {}".format(e.problem or e),
                                self.path, mark.line if mark else None, mark.column if mark else None)
        except IOError as e:
            raise ScenarioError("cannot read scenario: {}".format(e), self.path)
        if not isinstance(data, dict):
            raise ScenarioError("scenario must be a mapping", self.path, 0, 0)
        unknown = [k for k in data if k not in constants.SCENARIO_SECTIONS]
        if unknown:
            raise self.error("unknown section '{}'".format(unknown[0]), data, unknown[0])
        if "name" not in data:
            raise self.error("scenario needs a name", data)
        if "seed" not in data or not isinstance(data["seed"], int) or isinstance(data["seed"], bool):
            raise self.error("scenario needs an explicit integer seed", data, "seed" if "seed" in data else None)

        scenario = Scenario(str(data["name"]), int(data["seed"]), self.path, data.get("description"))
        scenario.digest = digest(data)
        for name, node in self.section(data, "generators").items():
            scenario.generators[name] = self.generator(name, node, scenario.generators, data["generators"])
        spaces = self.section(data, "spaces")
        for name in spaces:
            self.space(name, spaces, scenario)
        for name, node in self.section(data, "functors").items():
            scenario.functors[name] = self.functor(node, data["functors"], name)
        if data.get("ladder") is not None:
            scenario.ladder = self.ladder(data["ladder"], data)
        names = set()
        for i, node in enumerate(self.section(data, "checks", list)):
            check = self.check(node, scenario, data["checks"], i)
            if check.name in names:
                raise self.error("duplicate check name '{}'".format(check.name), node, "name")
            names.add(check.name)
            scenario.checks.append(check)
        logger.info("Loaded scenario %s from %s (%d checks)", scenario.name, self.path, len(scenario.checks))
        return scenario

    def generator(self, name, node, declared, parent, n=None):
        if not isinstance(node, dict) or len(node) != 1:
            raise self.error("generator '{}' needs exactly one recipe".format(name), parent, name)
        recipe, args = next(iter(node.items()))
        try:
            if recipe == "matrix":
                return Generator(name, np.array(args, dtype=float))
            if recipe == "laplacian":
                args = args or {}
                size = int(args.get("n", n or 0))
                if size < 1:
                    raise self.error("laplacian needs n >= 1", node, recipe)
                h = 1.0 / (size + 1) if args.get("scaled", False) else float(args.get("h", 1.0))
                form = elliptic.dirichlet_laplacian(size, h)
                return Generator(name, form.A, form)
            if recipe == "elliptic":
                grid = elliptic.Grid(args["points"], float(args.get("h", 1.0)))
                dirichlet = args.get("dirichlet", "all")
                if dirichlet == "all":
                    boundary = elliptic.BoundaryPartition.full(grid)
                elif dirichlet in ("none", None):
                    boundary = elliptic.BoundaryPartition.empty(grid)
                else:
                    boundary = elliptic.BoundaryPartition.sides(grid, list(dirichlet))
                mu = args.get("mu", 1.0)
                form = elliptic.assemble_divergence_form(grid, np.array(_plain(mu), dtype=float), boundary)
                return Generator(name, form.A, form)
            if recipe == "perturbed":
                base = self.ref(declared, args["of"], "generator", args, "of")
                return Generator(name, base.A + float(args["epsilon"]) * np.eye(base.dimension), base.form)
        except ParameterRangeError as e:
            raise self.ranged(e, node, recipe)
        except KeyError as e:
            raise self.error("generator '{}' recipe '{}' is missing {}".format(name, recipe, e), node, recipe)
        except ValueError as e:
            raise self.error("generator '{}': {}".format(name, e), node, recipe)
        raise self.error("unknown generator recipe '{}'".format(recipe), node, recipe)

    def measure(self, node, scenario, generator=None):
        if generator is not None:
            return generator.measure
        if "generator" in node:
            return self.ref(scenario.generators, node["generator"], "generator", node, "generator").measure
        if "weights" in node:
            return DiscreteMeasureSpace(np.array(node["weights"], dtype=float))
        if "n" in node:
            return DiscreteMeasureSpace.uniform(int(node["n"]), float(node.get("mass", 1.0)))
        raise self.error("space needs one of generator, weights or n", node)

    def space(self, name, spaces, scenario, seen=()):
        if name in scenario.spaces:
            return scenario.spaces[name]
        if name in seen:
            raise self.error("space '{}' refers to itself".format(name), spaces, name)
        node = spaces[name]
        scenario.spaces[name] = self.build_space(node, scenario, spaces, seen + (name,))
        return scenario.spaces[name]

    def build_space(self, node, scenario, spaces=None, seen=(), generator=None):
        if not isinstance(node, dict) or "kind" not in node:
            raise self.error("space declaration needs a kind", node)
        kind = node["kind"]
        try:
            if kind == "lp":
                return WeightedLp(self.measure(node, scenario, generator), float(node["p"]))
            if kind in ("sobolev", "negative_sobolev"):
                gen = generator or self.ref(scenario.generators, node.get("generator"), "generator", node, "generator")
                if gen.form is None:
                    raise self.error("{} spaces need an elliptic or laplacian generator".format(kind), node, "kind")
                form = gen.form
                if kind == "sobolev":
                    return elliptic.discrete_sobolev_space(form.grid, form.boundary, float(node["p"]))[0]
                return elliptic.negative_sobolev_space(form.grid, form.boundary, float(node["q"]))
            if kind in ("dual", "sum", "intersection"):
                if spaces is None:
                    raise self.error("{} spaces cannot be declared inline".format(kind), node, "kind")
                if kind == "dual":
                    self.ref(spaces, node.get("of"), "space", node, "of")
                    return DualOf(self.space(node["of"], spaces, scenario, seen))
                members = node.get("couple") or []
                for member in members:
                    self.ref(spaces, member, "space", node, "couple")
                couple = InterpolationCouple(*[self.space(m, spaces, scenario, seen) for m in members])
                return Sum(couple) if kind == "sum" else Intersection(couple)
        except ParameterRangeError as e:
            raise self.ranged(e, node, "kind")
        except KeyError as e:
            raise self.error("space of kind '{}' is missing {}".format(kind, e), node, "kind")
        except TypeError as e:
            raise self.error(str(e), node, "kind")
        raise self.error("unknown space kind '{}'".format(kind), node, "kind")

    def functor(self, node, parent, name):
        if not isinstance(node, dict):
            raise self.error("functor '{}' must be a mapping".format(name), parent, name)
        kind = node.get("kind")
        try:
            if kind == "real":
                return interp.RealK(float(node["theta"]), float(node.get("q", 2)),
                                    node.get("J", constants.DEFAULT_DYADIC_RANGE))
            if kind == "complex":
                return interp.ComplexWeightedLp(float(node["theta"]))
        except ParameterRangeError as e:
            raise self.ranged(e, node, e.name if e.name in node else "kind")
        except KeyError as e:
            raise self.error("functor '{}' is missing {}".format(name, e), parent, name)
        raise self.error("unknown functor kind '{}'".format(kind), parent, name)

    def ladder(self, node, data):
        if not isinstance(node, dict) or "levels" not in node or "generator" not in node:
            raise self.error("ladder needs levels and a generator recipe", data, "ladder")
        try:
            levels = [int(n) for n in node["levels"]]
        except (TypeError, ValueError):
            raise self.error("ladder levels must be a list of integer sizes", node, "levels")
        if not levels or sorted(levels) != levels or levels[0] < 1:
            raise self.error("ladder levels must be increasing positive sizes", node, "levels")
        members = node.get("couple") or []
        if len(members) != 2:
            raise self.error("ladder needs a couple of two space declarations", node, "couple")
        out = []
        for n in levels:
            gen = self.generator("ladder@{}".format(n), node["generator"], {}, node, n=n)
            X0 = self.build_space(members[0], None, generator=gen)
            X1 = self.build_space(members[1], None, generator=gen)
            out.append(LadderLevel(n, semigroup.GeneratorRealization(gen.A, X0, name=gen.name),
                                   semigroup.GeneratorRealization(gen.A, X1, name=gen.name)))
        return out

    def check(self, node, scenario, parent, index):
        if not isinstance(node, dict):
            raise self.error("check entry must be a mapping", parent, index)
        for key in ("name", "kind"):
            if key not in node:
                raise self.error("check needs a {}".format(key), parent, index)
        kind = node["kind"]
        if kind not in CHECKS:
            raise self.error("unknown check kind '{}'".format(kind), node, "kind")
        tol = node.get("tol")
        if tol is not None:
            tol = self.positive(tol, node, "tol")
        params = node.get("params") or {}
        if not isinstance(params, dict):
            raise self.error("params of check '{}' must be a mapping".format(node["name"]), node, "params")
        check = CheckSpec(str(node["name"]), kind, tol, _plain(params),
                          bool(node.get("expect_refusal", False)), node.lc.line)
        for key, value in params.items():
            if key.endswith("tol"):
                self.positive(value, params, key)
        if "generator" in node:
            check.generators = [self.ref(scenario.generators, node["generator"], "generator", node, "generator")]
        elif "generators" in node:
            check.generators = [self.ref(scenario.generators, g, "generator", node["generators"], i)
                                for i, g in enumerate(node["generators"])]
        for key in ("couple", "target"):
            if key in node:
                members = node[key]
                if len(members) != 2:
                    raise self.error("{} needs two spaces".format(key), node, key)
                X = [self.ref(scenario.spaces, m, "space", members, i) for i, m in enumerate(members)]
                try:
                    setattr(check, key, InterpolationCouple(*X))
                except DimensionMismatchError as e:
                    raise self.error(str(e), node, key)
        if "space" in node:
            check.space = self.ref(scenario.spaces, node["space"], "space", node, "space")
        if "functor" in node:
            check.functor = self.ref(scenario.functors, node["functor"], "functor", node, "functor")
        if node.get("ladder"):
            if not scenario.ladder:
                raise self.error("check uses the ladder but none is declared", node, "ladder")
            check.ladder = True
        missing = [r for r in CHECKS[kind].needs if not _has(check, r)]
        if missing:
            raise self.error("check '{}' of kind {} needs {}".format(check.name, kind, ", ".join(missing)), node, "kind")
        if check.couple is not None and check.generators:
            for g in check.generators:
                if g.dimension != check.couple.dimension:
                    raise self.error("generator '{}' has dimension {} but the couple has {}".format(
                        g.name, g.dimension, check.couple.dimension), node, "couple")
        return check


def _has(check, requirement):
    if requirement == "generator":
        return bool(check.generators)
    if requirement == "form":
        return bool(check.generators) and check.generators[0].form is not None
    return bool(getattr(check, requirement))


def load_scenario(path):
    """Parse, resolve and validate a scenario file.

    :raises ScenarioError: parse errors and invalid entries, with line/column
    :raises DanglingReferenceError: references to undeclared names
    """
    return _Loader(path).load()


class _Kind(object):
    def __init__(self, func, needs=()):
        self.func = func
        self.needs = needs


def _vector(check, rng, n):
    x = check.param("x")
    return util.as_vector(x, n) if x is not None else rng.standard_normal(n)


def _run_semigroup_law(scenario, check, seed):
    A = check.generators[0].A
    x = _vector(check, util.rng(seed), A.shape[0])
    return semigroup.semigroup_law_check(A, x, check.param("times", [0.25, 0.5, 1.0]), check.tol or 1e-9, check.name)


def _run_euler_convergence(scenario, check, seed):
    A = check.generators[0].A
    x = _vector(check, util.rng(seed), A.shape[0])
    report = semigroup.euler_convergence_check(
        A, x, float(check.param("t", 1.0)), check.param("ns", [16, 64, 256, 1024, 4096]),
        order=float(check.param("order", 1.0)), order_tol=float(check.param("order_tol", 0.15)),
        max_final_error=check.param("max_final_error"), name=check.name)
    report.seed = seed
    return report


def _run_laplace_quadrature(scenario, check, seed):
    A = check.generators[0].A
    x = _vector(check, util.rng(seed), A.shape[0])
    report = semigroup.laplace_quadrature_check(
        A, check.param("lambdas", [0.5, 1.0, 2.0, 4.0]), x, check.tol or 1e-8,
        steps=int(check.param("steps", constants.LAPLACE_DEFAULT_STEPS)), horizon=check.param("horizon"),
        name=check.name)
    report.seed = seed
    return report


def _run_resolvent_semigroup_equivalence(scenario, check, seed):
    R0, R1 = check.realizations
    return consistency.resolvent_semigroup_equivalence(
        R0, R1, check.param("lambdas", [0.5, 1.0, 2.0, 4.0]), check.param("times", [0.25, 1.0, 4.0]),
        int(check.param("n_euler", 64)), check.tol or 1e-6, samples=int(check.param("samples", 2)), seed=seed,
        steps=int(check.param("steps", 120)), name=check.name)


def _dense_set(check, seed, n):
    dense = check.param("dense_set", "basis")
    if dense == "basis":
        return np.eye(n)
    return util.rng(seed).standard_normal((int(dense), n))


def _run_operator_consistency(scenario, check, seed):
    R0, R1 = check.realizations
    report = consistency.check_operator_consistency(
        R0.A, R1.A, _dense_set(check, seed, R0.dimension), check.tol or 1e-12, check.couple, check.name)
    report.seed = seed
    return report


def _run_adjoint_consistency(scenario, check, seed):
    R0, R1 = check.realizations
    pair = consistency.ConsistentPair.from_realizations(R0, R1, _dense_set(check, seed, R0.dimension))
    functionals = util.rng(seed).standard_normal((int(check.param("functionals", 4)), R0.dimension))
    report = consistency.adjoint_consistency_check(pair, functionals, check.tol or 1e-10, check.name)
    report.seed = seed
    return report


def _run_domain_intersection(scenario, check, seed):
    R0, R1 = check.realizations
    return consistency.domain_intersection_check(R0, R1, np.eye(R0.dimension), check.tol or 1e-10, check.name)


def _run_dual_sum_identity(scenario, check, seed):
    samples = util.rng(seed).standard_normal((int(check.param("samples", 100)), check.couple.dimension))
    report = dual_sum_identity_check(check.couple, list(samples), check.tol or 1e-5, check.name)
    report.seed = seed
    return report


def _run_k_functional_oracle(scenario, check, seed):
    rng = util.rng(seed)
    dims = check.param("dimensions", list(range(2, 9)))
    lo, hi = check.param("t_range", [1e-2, 1e2])
    samples = []
    for _ in range(int(check.param("samples", 200))):
        n = int(rng.choice(dims))
        t = float(np.exp(rng.uniform(np.log(lo), np.log(hi))))
        samples.append((t, rng.standard_normal(n)))
    report = interp.k_functional_oracle_check(samples, check.tol or 1e-6, check.name)
    report.seed = seed
    return report


def _run_riesz_thorin(scenario, check, seed):
    size = int(check.param("size", 4))
    matrices = util.rng(seed).standard_normal((int(check.param("count", 1000)), size, size))
    return interp.riesz_thorin_check(
        list(matrices), float(check.param("p0", 1.0)), float(check.param("p1", np.inf)),
        float(check.param("theta", 0.5)), check.tol or 1e-7, seed, check.name)


def _operator(check):
    A = check.generators[0].A
    which = check.param("operator", "matrix")
    if which == "matrix":
        return A
    if which == "resolvent":
        lam = float(check.param("lambda", 1.0))
        return semigroup.ShiftedFactorization(A, lam).solve_raw(np.eye(A.shape[0]))
    if which == "semigroup":
        return semigroup.semigroup_matrix(A, float(check.param("t", 1.0)))
    raise ScenarioError("unknown operator '{}' in check {}".format(which, check.name))


def _run_interpolated_operator_norm(scenario, check, seed):
    return interp.interpolated_operator_norm_check(
        _operator(check), check.couple, check.target or check.couple, check.functor,
        samples=int(check.param("samples", constants.GENERIC_ASCENT_CANDIDATES)), tol=check.tol or 1e-7,
        seed=seed, name=check.name)


def _run_interpolated_semigroup(scenario, check, seed):
    R0, R1 = check.realizations
    times = check.param("times", [2.0 ** -k for k in range(1, 11)])
    return consistency.interpolated_semigroup_check(
        R0, R1, check.functor, times, check.tol or 1e-8, samples=int(check.param("samples", 4)), seed=seed,
        name=check.name)


def _run_generator_interpolation(scenario, check, seed):
    levels = [(level.R0, level.R1) for level in scenario.ladder]
    return consistency.generator_interpolation_check(
        levels, check.functor, samples=int(check.param("samples", 40)), seed=seed,
        bracket_factor=float(check.param("bracket_factor", constants.BRACKET_LEVEL_FACTOR)),
        rho_range=tuple(check.param("rho_range", constants.RHO_RANGE)), name=check.name)


def _run_resolvent_interpolation(scenario, check, seed):
    R0, R1 = check.realizations
    return consistency.resolvent_interpolation_check(
        R0, R1, check.functor, samples=int(check.param("samples", 4)), tol=check.tol or 1e-8, seed=seed,
        name=check.name)


def _times(check, default):
    times = check.param("times", default)
    if isinstance(times, dict):
        return list(np.geomspace(float(times["start"]), float(times["stop"]), int(times.get("count", 7))))
    return [float(t) for t in times]


def _run_gaussian_bound(scenario, check, seed):
    form = check.generators[0].form
    return elliptic.gaussian_bound_check(
        form, _times(check, {"start": 1e-3, "stop": 1e-1, "count": 7}),
        quantile=float(check.param("quantile", constants.GAUSSIAN_DEFAULT_QUANTILE)),
        expected_c=float(check.param("expected_c", 1.0)), c_tol=float(check.param("c_tol", 0.25)),
        exponent_tol=float(check.param("exponent_tol", 0.10)), name=check.name)


def _run_lp_scale_consistency(scenario, check, seed):
    form = check.generators[0].form
    return elliptic.lp_scale_consistency_check(
        form, [float(p) for p in check.param("p_list", [2.0])], float(check.param("q", 2.0)),
        _times(check, [0.1, 1.0]), check.tol or 1e-12, check.name)


def _run_dual_scale_consistency(scenario, check, seed):
    form = check.generators[0].form
    return elliptic.check_dual_scale_consistency(
        form, [float(p) for p in check.param("p_list", [2.0])], float(check.param("q", 2.0)),
        check.tol or 1e-12, check.name)


def _run_extension_uniqueness(scenario, check, seed):
    R0, R1 = check.realizations
    pair = consistency.ConsistentPair.from_realizations(R0, R1)
    return consistency.extension_uniqueness_check(
        pair, check.functor, samples=int(check.param("samples", 4)), tol=check.tol or 1e-8, seed=seed,
        name=check.name)


CHECKS = {
    "semigroup_law": _Kind(_run_semigroup_law, ("generator",)),
    "euler_convergence": _Kind(_run_euler_convergence, ("generator",)),
    "laplace_quadrature": _Kind(_run_laplace_quadrature, ("generator",)),
    "resolvent_semigroup_equivalence": _Kind(_run_resolvent_semigroup_equivalence, ("generator", "couple")),
    "operator_consistency": _Kind(_run_operator_consistency, ("generator", "couple")),
    "adjoint_consistency": _Kind(_run_adjoint_consistency, ("generator", "couple")),
    "domain_intersection": _Kind(_run_domain_intersection, ("generator", "couple")),
    "dual_sum_identity": _Kind(_run_dual_sum_identity, ("couple",)),
    "k_functional_oracle": _Kind(_run_k_functional_oracle),
    "riesz_thorin": _Kind(_run_riesz_thorin),
    "interpolated_operator_norm": _Kind(_run_interpolated_operator_norm, ("generator", "couple", "functor")),
    "interpolated_semigroup": _Kind(_run_interpolated_semigroup, ("generator", "couple", "functor")),
    "generator_interpolation": _Kind(_run_generator_interpolation, ("ladder", "functor")),
    "resolvent_interpolation": _Kind(_run_resolvent_interpolation, ("generator", "couple", "functor")),
    "gaussian_bound": _Kind(_run_gaussian_bound, ("form",)),
    "lp_scale_consistency": _Kind(_run_lp_scale_consistency, ("form",)),
    "dual_scale_consistency": _Kind(_run_dual_scale_consistency, ("form",)),
    "extension_uniqueness": _Kind(_run_extension_uniqueness, ("generator", "couple", "functor")),
}


def run_check(scenario, check):
    """One check in isolation. Exceptions never escape: a refused functor or
    any other error becomes an inconclusive report with the diagnostics."""
    seed = scenario.check_seed(check)
    log = logutil.entity_logger(check.name, __name__)
    start = time.time()
    try:
        report = CHECKS[check.kind].func(scenario, check, seed)
        if check.expect_refusal:
            report.fail("expected the functor to be refused, but the check ran")
    except FunctorRefusedError as e:
        report = CheckReport(check.name, seed)
        if check.expect_refusal:
            report.note("refused as expected: {}".format(e.citation))
        else:
            report.uncertified("functor refused: {}".format(e))
    except ConsistlabError as e:
        log.warning("check raised %s: %s", type(e).__name__, e)
        report = CheckReport(check.name, seed)
        report.uncertified("{}: {}".format(type(e).__name__, e))
    except Exception as e:
        log.exception("unexpected error")
        report = CheckReport(check.name, seed)
        report.uncertified("internal error {}: {}".format(type(e).__name__, e))
    report.name = check.name
    report.seed = seed
    report.elapsed = time.time() - start
    log.info("%s in %.2fs", report.verdict, report.elapsed)
    return report


def run_scenario(scenario, jobs=None, seed=None, progress_file=None):
    """Run every check on a pool of `jobs` threads; reports keep declaration order.

    :param seed: overrides the scenario's base seed
    """
    if seed is not None:
        scenario.with_seed(seed)
    if jobs is not None and int(jobs) < 1:
        raise ParameterRangeError("jobs", jobs, "jobs >= 1")
    run = RunReport(scenario.name, scenario.digest, version(), scenario.seed)
    start = time.time()
    if scenario.checks:
        reports = util.parallel_results_with_progress(
            scenario.checks, lambda check: run_check(scenario, check), jobs=jobs, file=progress_file)
        for r in reports:
            run.add(r)
    run.elapsed = time.time() - start
    return run
