import allure


class Assertions:
    def __init__(self, logger):
        self.logger = logger

    def assert_stable(self, report, label: str = "outcome"):
        """
        Validate that a stability report has no blocking witness and no defect.
        """
        self.logger.info(f"Stability of {label}: stable={report.stable}, witnesses={len(report.witnesses)}")
        with allure.step(f"Validate {label} is pairwise stable"):
            assert report.stable, (
                f"❌ {label} is not stable: p1_ok={report.p1_ok}, feasibility_ok={report.feasibility_ok}, "
                f"matching_ok={report.matching_ok}, payoffs_ok={report.payoffs_ok}, "
                f"witnesses={[w.to_dict() for w in report.witnesses[:5]]}, defects={list(report.defects)}"
            )
            with allure.step(f"Blocking witnesses: {len(report.witnesses)}"):
                pass
            with allure.step(f"✅ Stability Validation Passed ({label})"):
                pass

    def assert_unstable(self, report, label: str = "outcome"):
        """
        Validate that a planted instability is detected.
        """
        self.logger.info(f"Instability of {label}: witnesses={len(report.witnesses)}, defects={list(report.defects)}")
        with allure.step(f"Validate {label} is detected as unstable"):
            assert not report.stable, f"❌ {label} passed verification although it should not"
            with allure.step(f"✅ Instability Detected ({label})"):
                pass

    def assert_audit_clean(self, audit, label: str = "trace"):
        """
        Validate that a trace keeps every guarantee of the price-adjustment loop.
        """
        self.logger.info(f"Audit of {label}: passes={audit.passes}, bound={audit.bound}, violations={len(audit.violations)}")
        with allure.step(f"Validate audit of {label}"):
            assert audit.ok, f"❌ Audit of {label} failed: {[str(v) for v in audit.violations[:5]]}"
            with allure.step(f"Passes: {audit.passes} (bound {audit.bound})"):
                pass
            with allure.step(f"✅ Audit Passed ({label})"):
                pass

    def assert_within_iteration_bound(self, trace):
        """
        Validate that the number of passes stays within the iteration bound.
        """
        self.logger.info(f"Passes: {trace.passes}, Bound: {trace.iteration_bound}")
        with allure.step(f"Validate passes ≤ {trace.iteration_bound}"):
            assert trace.passes <= trace.iteration_bound, (
                f"❌ {trace.passes} passes exceed the bound {trace.iteration_bound}"
            )
            with allure.step(f"✅ Termination Bound Validation Passed ({trace.passes})"):
                pass

    def assert_outcome_equals(self, outcome, matching, prices, q, r, iterations=None):
        """
        Validate matching, price vector and payoffs of an outcome against expected values.
        """
        self.logger.info(f"Outcome: X={list(outcome.matching)}, p={outcome.prices}, q={outcome.q}, r={outcome.r}")
        with allure.step("Validate outcome against expected values"):
            assert sorted(outcome.matching) == sorted(matching), (
                f"❌ Matching mismatch: {list(outcome.matching)}. Expected {sorted(matching)}"
            )
            with allure.step(f"Matching: {list(outcome.matching)}"):
                pass
            assert outcome.prices == prices, f"❌ Price mismatch: {outcome.prices}. Expected {prices}"
            with allure.step(f"Prices: {outcome.prices}"):
                pass
            assert outcome.q == q, f"❌ Seller payoff mismatch: {outcome.q}. Expected {q}"
            assert outcome.r == r, f"❌ Buyer payoff mismatch: {outcome.r}. Expected {r}"
            with allure.step(f"Payoffs: q={outcome.q}, r={outcome.r}"):
                pass
            if iterations is not None:
                assert outcome.iterations == iterations, (
                    f"❌ Pass count mismatch: {outcome.iterations}. Expected {iterations}"
                )
            with allure.step("✅ Outcome Validation Passed"):
                pass

    def assert_in_oracle(self, outcome, stable_outcomes):
        """
        Validate that the solver's outcome is among the exhaustively enumerated stable outcomes.
        """
        signatures = {candidate.signature() for candidate in stable_outcomes}
        self.logger.info(f"Oracle size: {len(signatures)}, Outcome: {outcome.signature()}")
        with allure.step("Validate outcome appears in the stable-outcome oracle"):
            assert outcome.signature() in signatures, (
                f"❌ Outcome {outcome.signature()} not among {len(signatures)} stable outcomes"
            )
            with allure.step(f"✅ Oracle Membership Validation Passed ({len(signatures)} stable outcomes)"):
                pass

    def assert_golden_bytes(self, actual: bytes, expected: bytes, name: str):
        """
        Validate a serialized document byte for byte against its checked-in golden.
        """
        self.logger.info(f"Golden comparison: {name} ({len(actual)} vs {len(expected)} bytes)")
        with allure.step(f"Validate {name} matches golden"):
            assert actual == expected, (
                f"❌ {name} differs from golden:\n{actual.decode('utf-8')}\nExpected:\n{expected.decode('utf-8')}"
            )
            with allure.step(f"✅ Golden Validation Passed ({name})"):
                pass
