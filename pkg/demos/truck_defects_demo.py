# Empirical pipeline on the classic 45-month truck-defects series: log-shift
# transform, zero-mean AR(2) fit, and all regions near the phi1+phi2=1 line.
# Equivalent CLI invocation:
#   arcd analyze --input tests/fixtures/truck_defects.csv --transform logshift --seed 5

from pathlib import Path

from arcd.cli import main

fixture = Path(__file__).resolve().parents[1] / "tests" / "fixtures" / "truck_defects.csv"
raise SystemExit(main([
    "analyze",
    "--input", str(fixture),
    "--transform", "logshift",
    "--seed", "5",
    "--out-prefix", "truck",
]))
