import subprocess
import sys
from pathlib import Path

import pytest

SCRIPTS = Path(__file__).resolve().parents[1] / "scripts"


@pytest.mark.parametrize("name,args,expect", [
    ("measures_study.py", ["--reps", "20", "--n", "20,30"], "gauss_rho0.5/gauss_rho0.5_imse.csv"),
    ("bernstein_study.py", ["--reps", "10", "--n", "20:22", "--pair-across-n"], "gumbel_tau0.5/manifest.json"),
    ("lre_heatmaps.py", ["--reps", "20", "--n", "20", "--cells", "4"], "indep_lre_n20.csv"),
])
def test_script_smoke(tmp_path, name, args, expect):
    r = subprocess.run([sys.executable, str(SCRIPTS / name), *args, "--out", str(tmp_path)],
                       capture_output=True, text=True, cwd=SCRIPTS)
    assert r.returncode == 0, r.stderr
    assert (tmp_path / expect).exists()
