use pyo3::prelude::*;
use sbm_spectra_py::sbm_spectra_py as module;

#[test]
fn module_from_embedded_interpreter() {
    pyo3::append_to_inittab!(module);
    Python::initialize();
    Python::attach(|py| {
        py.run(
            cr#"
import math
import sbm_spectra_py as sbm

ev = sbm.eigenvalues(120, 2, 0.2, 0.05, seed=3)
assert len(ev) == 120 and ev == sorted(ev, reverse=True)

law = sbm.Law.from_coefficient(0.05)
assert abs(law.edge - 2.0 - 0.05) < 0.01
assert law.mtilde(0.3, 0.1).imag > 0
assert abs(sbm.Law.from_coefficient(0.0).rho(0.0) - 1 / math.pi) < 1e-6

prof = sbm.profile(120, 2, 0.2, 0.05)
assert prof["q"] > 0 and abs(sbm.Law.for_model(120, 2, 0.2, 0.05).c4 - prof["c4"]) < 1e-15

out = sbm.detect(600, 2, 0.1, 0.02, seed=1)
assert set(out) >= {"k_hat", "gap_report", "accuracy", "top_eigenvalues"}

for bad in [lambda: sbm.sample(10, 3, 0.1, 0.1), lambda: sbm.Law.from_coefficient(1.0)]:
    try:
        bad()
    except ValueError:
        pass
    else:
        raise AssertionError("expected ValueError")
"#,
            None,
            None,
        )
        .unwrap();
    });
}
