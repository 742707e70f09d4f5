import json
import sys

import numpy as np
import pytest

from splinenas import SupportPoint, spline
from splinenas.errors import (
    EvalNonZeroExit,
    EvalTimeout,
    EvalUnparseable,
    UnknownBenchmark,
)
from splinenas.evaluators import (
    as_point_evaluator,
    builtin_benchmark,
    run_external_evaluator,
)
from splinenas.paramspace import initial_design

from conftest import unit_space


def py_command(code: str) -> str:
    return f'{sys.executable} -c "{code}"'


class TestExternalEvaluator:
    def test_plain_number_output(self):
        value = run_external_evaluator(py_command("print(42.0)"), (1.0,), ("a",))
        assert value == 42.0

    def test_last_parseable_line_wins(self):
        code = "print('epoch 1: loss 3.2'); print('saving model'); print(77.25)"
        assert run_external_evaluator(py_command(code), (1.0,), ("a",)) == 77.25

    def test_nonzero_exit(self):
        with pytest.raises(EvalNonZeroExit) as err:
            run_external_evaluator(
                py_command("import sys; sys.stderr.write('cuda oom'); sys.exit(1)"),
                (1.0,),
                ("a",),
            )
        assert "cuda oom" in str(err.value)

    def test_unparseable_output(self):
        with pytest.raises(EvalUnparseable):
            run_external_evaluator(py_command("print('accuracy: high')"), (1.0,), ("a",))

    def test_non_finite_output_rejected(self):
        with pytest.raises(EvalUnparseable):
            run_external_evaluator(py_command("print(float('nan'))"), (1.0,), ("a",))

    def test_timeout(self):
        with pytest.raises(EvalTimeout):
            run_external_evaluator(
                py_command("import time; time.sleep(5)"), (1.0,), ("a",), timeout=0.3
            )

    def test_parameters_passed_via_environment(self):
        code = "import os; print(os.environ['SPLINENAS_C1'])"
        value = run_external_evaluator(py_command(code), (150.0,), ("c1",))
        assert value == 150.0

    def test_stdin_payload(self):
        code = (
            "import sys, json; doc = json.loads(sys.stdin.readline());"
            "print(doc['point'][1])"
        )
        value = run_external_evaluator(
            py_command(code), (1.5, 2.5), ("a", "b"), study_id="s1"
        )
        assert value == 2.5

    def test_stdin_names_and_study_id(self):
        code = (
            "import sys, json; doc = json.loads(sys.stdin.readline());"
            "print(len(doc['names']) if doc['study'] == 'abc' else -1)"
        )
        value = run_external_evaluator(
            py_command(code), (1.0, 2.0, 3.0), ("a", "b", "c"), study_id="abc"
        )
        assert value == 3.0

    def test_retries(self, tmp_path):
        counter = tmp_path / "attempts"
        counter.write_text("0")
        code = (
            f"import pathlib, sys; p = pathlib.Path({str(counter)!r});"
            "n = int(p.read_text()) + 1; p.write_text(str(n));"
            "sys.exit(1) if n < 3 else print(5.0)"
        )
        value = run_external_evaluator(py_command(code), (1.0,), ("a",), retries=2)
        assert value == 5.0
        assert counter.read_text() == "3"

    def test_no_retries_by_default(self, tmp_path):
        counter = tmp_path / "attempts"
        counter.write_text("0")
        code = (
            f"import pathlib, sys; p = pathlib.Path({str(counter)!r});"
            "p.write_text(str(int(p.read_text()) + 1)); sys.exit(1)"
        )
        with pytest.raises(EvalNonZeroExit):
            run_external_evaluator(py_command(code), (1.0,), ("a",))
        assert counter.read_text() == "1"


class TestBenchmarks:
    def test_negated_sphere_peaks_at_center(self):
        bench = builtin_benchmark("sphere", negate=True)
        assert bench(np.full(3, 0.5)) == 0.0
        assert bench(np.array([0.4, 0.5, 0.5])) < 0.0

    def test_rastrigin_standard_values(self):
        bench = builtin_benchmark("rastrigin", negate=False)
        center = np.full(3, 0.5)
        assert bench(center) == pytest.approx(0.0, abs=1e-9)
        # integer lattice point x = (1, 1, 1) is a local minimum with value 3
        lattice = center + 1.0 / 10.24
        assert bench(lattice) == pytest.approx(3.0, abs=1e-9)
        # multimodal: the lattice point beats nearby off-lattice points
        assert bench(lattice + 0.5 / 10.24) > bench(lattice)

    def test_rosenbrock_optimum(self):
        bench = builtin_benchmark("rosenbrock", negate=False)
        opt = bench.optimum_unit(4)
        assert bench(opt) == pytest.approx(0.0, abs=1e-9)

    def test_affine_benchmark_reproduced_by_spline(self):
        space = unit_space(3)
        bench = builtin_benchmark("affine", negate=False)
        pts = [
            SupportPoint(x, bench(np.asarray(x)), "initial")
            for x in initial_design(space)
        ]
        model = spline.fit(space, pts)
        assert np.max(np.abs(model.rbf_coeffs)) <= 1e-8
        assert spline.evaluate(model, (0.2, 0.9, 0.4)) == pytest.approx(1.5, abs=1e-8)

    def test_unknown_benchmark(self):
        with pytest.raises(UnknownBenchmark):
            builtin_benchmark("ackley", negate=False)

    def test_point_evaluator_maps_box_to_unit(self):
        from splinenas import Dimension, ParamSpace

        space = ParamSpace(dims=(Dimension("a", 10.0, 20.0), Dimension("b", 0.0, 4.0)))
        evaluate = as_point_evaluator(builtin_benchmark("sphere", negate=True), space)
        assert evaluate((15.0, 2.0)) == 0.0
        assert evaluate((10.0, 0.0)) == pytest.approx(-0.5)
