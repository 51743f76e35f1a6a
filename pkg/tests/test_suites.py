import os
import tempfile
import unittest
from unittest import mock

from fvm.structures import Signature
from fvm.suites import (
    SUITES,
    SuiteConfig,
    build_law,
    first_binary,
    law_family,
    load_suite_config,
    run_suite,
)
from fvm.util import FVMError, worker_count


class TestSuiteConfig(unittest.TestCase):
    def setUp(self):
        self._tmp = tempfile.TemporaryDirectory()
        self.path = os.path.join(self._tmp.name, "settings.yaml")

    def tearDown(self):
        self._tmp.cleanup()

    def write(self, text):
        with open(self.path, "w") as settings_file:
            settings_file.write(text)
        return self.path

    def test_defaults_and_header(self):
        cfg = load_suite_config(self.write(""))
        self.assertEqual(cfg.suites, list(SUITES))
        self.assertEqual(
            cfg.header(),
            "SUITE seed=0 size=2 graph_size=4 k=1,2 len=2,3 signature={E/2} "
            f"suites={','.join(SUITES)} mutate=false",
        )

    def test_overrides_win(self):
        cfg = load_suite_config(self.write("seed: 3\nks: [1]\n"), {"seed": 7})
        self.assertEqual((cfg.seed, cfg.ks), (7, [1]))

    def test_invalid_settings(self):
        cases = {
            "unknown key": "colour: red\n",
            "unknown suite": "suites: [everything]\n",
            "empty ks": "ks: []\n",
            "zero size": "size: 0\n",
            "weak variant": "weak_variant: tau\n",
            "empty signature": "signature: {}\n",
        }
        for label, text in cases.items():
            with self.assertRaises(FVMError, msg=label):
                load_suite_config(self.write(text))

    def test_error_names_the_file_and_key(self):
        with self.assertRaises(FVMError) as caught:
            load_suite_config(self.write("ks: []\n"))
        self.assertIn(f"{self.path}: ks:", str(caught.exception))


class TestFamilies(unittest.TestCase):
    def test_law_families(self):
        modal = Signature.of({"R": 2, "P": 1})
        reduct = law_family("reduct", {"E": 2}, 1, 3)
        self.assertTrue(all(A.signature == modal for A in reduct))
        self.assertTrue(all(A.is_pointed for A in law_family("merge", {"E": 2}, 1, 3)))
        self.assertEqual(len(law_family("cos-to-pebble3", {"E": 2}, 1, 3)), 8)
        self.assertTrue(all(not A.is_pointed for A in law_family("coproduct-E", {"E": 2}, 1, 3)))

    def test_build_law(self):
        self.assertEqual(build_law("coproduct-E", 2, 3).name, "coproduct-E")
        self.assertEqual(build_law("merge", 1, 2, {"R": 2, "S": 2}).operation.arity, 2)
        self.assertEqual(first_binary({"P": 1, "S": 2}), "S")
        with self.assertRaises(FVMError):
            first_binary({"P": 1})


class TestRunSuite(unittest.TestCase):
    def test_spectra_suite(self):
        cfg = SuiteConfig(graph_size=3, lengths=[2], suites=["spectra"])
        code, lines, report = run_suite(cfg)
        self.assertEqual(code, 0, msg="\n".join(lines))
        self.assertEqual(lines[0], cfg.header())
        self.assertIn("SPECTRA cospectral K14,C4+K1 PASS", lines)
        self.assertTrue(lines[-1].startswith("SUMMARY PASS="))
        self.assertTrue(report.passed)

    def test_translations_suite(self):
        cfg = SuiteConfig(size=1, suites=["translations"])
        code, lines, _ = run_suite(cfg)
        self.assertEqual(code, 0, msg="\n".join(lines))
        self.assertTrue(any(line.startswith("TR weak:S:") for line in lines))

    def test_nothing_selected(self):
        code, lines, _ = run_suite(SuiteConfig(suites=[]))
        self.assertEqual((code, len(lines)), (0, 1))


class TestWorkerCount(unittest.TestCase):
    def test_environment_override(self):
        with mock.patch.dict(os.environ, {"FVM_THREADS": "3"}):
            self.assertEqual(worker_count(), 3)
        with mock.patch.dict(os.environ, {"FVM_THREADS": "0"}):
            self.assertEqual(worker_count(), 1)
        with mock.patch.dict(os.environ, {"FVM_THREADS": "many"}):
            self.assertEqual(worker_count(), os.cpu_count() or 1)


if __name__ == "__main__":
    unittest.main()
