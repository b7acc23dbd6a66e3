"""Generate a synthetic credit-line dataset shaped like the FICO HELOC table.

The real HELOC file is distributed under a click-through licence and is not
bundled here. This script produces a seeded stand-in with the same 23 feature
columns (human-readable names), the same row count, the same special negative
codes (-7, -8, -9) and a binary "Risk Performance" label driven mostly by
External Risk Estimate, Average Months in File and Net Fraction Revolving
Burden.

    python3 data/gen_heloc_like.py > data/heloc_like.csv
"""

import sys

import numpy as np

ROWS = 10459
SEED = 20210


def main() -> None:
    rng = np.random.default_rng(SEED)
    n = ROWS
    quality = rng.normal(size=n)
    tenure = rng.normal(size=n)
    usage = rng.normal(size=n)

    def ints(x, lo, hi):
        return np.clip(np.rint(x), lo, hi).astype(int)

    ere = ints(72 + 8.5 * quality + 2.0 * rng.normal(size=n), 33, 94)
    oldest = ints(np.exp(5.2 + 0.45 * tenure + 0.1 * rng.normal(size=n)), 2, 803)
    recent_open = ints(rng.exponential(9.0, size=n), 0, 383)
    amif = ints(78 + 24 * tenure + 6 * quality + 8 * rng.normal(size=n), 4, 383)
    satisfactory = ints(21 + 8 * tenure + 3 * quality + 5 * rng.normal(size=n), 0, 79)
    risk = np.exp(-0.9 * quality)
    trades60 = rng.poisson(0.35 * risk)
    trades90 = np.minimum(trades60, rng.poisson(0.25 * risk))
    never_delq = ints(93 + 5 * quality + 4 * rng.normal(size=n), 0, 100)
    has_delq = rng.random(n) < 1 / (1 + np.exp(1.0 * quality + 0.2))
    msld = np.where(has_delq, ints(rng.exponential(20 + 8 * quality.clip(-2, 2) + 16), 0, 83), -7)
    max_delq_12m = ints(6 + 1.4 * quality + rng.normal(size=n), 0, 9)
    max_delq_ever = ints(6 + 1.0 * quality + rng.normal(size=n), 2, 8)
    total_trades = ints(satisfactory + 2 + rng.poisson(2.0, size=n), 0, 104)
    open_12m = ints(rng.poisson(1.9 + 0.6 * np.exp(-0.3 * quality)), 0, 19)
    pct_install = ints(34 + 10 * rng.normal(size=n) - 3 * usage, 0, 100)
    inq_recent = np.where(rng.random(n) < 0.18, -7, ints(rng.exponential(2.5, size=n), 0, 24))
    inq_recent = np.where(rng.random(n) < 0.05, -8, inq_recent)
    inq_6m = rng.poisson(1.4 * np.exp(-0.35 * quality))
    inq_6m_excl = np.minimum(inq_6m, rng.poisson(1.2 * np.exp(-0.35 * quality)))
    nfrb = ints(35 - 22 * quality + 12 * usage + 10 * rng.normal(size=n), 0, 232)
    nfib = np.where(rng.random(n) < 0.33, -8, ints(68 + 18 * rng.normal(size=n), 0, 471))
    revolving_bal = ints(4 + 2.5 * usage + 1.5 * tenure + rng.normal(size=n), 0, 32)
    install_bal = ints(2.5 + 1.4 * rng.normal(size=n), 1, 23)
    high_util = np.where(rng.random(n) < 0.06, -8, ints(1 + 1.2 * usage - 0.8 * quality, 0, 18))
    pct_bal = ints(66 + 12 * usage - 6 * quality + 8 * rng.normal(size=n), 0, 100)

    # ~5.6% of real HELOC rows are fully unreported (-9 everywhere).
    blank = rng.random(n) < 0.056

    columns = [
        ("External Risk Estimate", ere),
        ("Months Since Oldest Trade Open", oldest),
        ("Months Since Most Recent Trade Open", recent_open),
        ("Average Months in File", amif),
        ("Number Satisfactory Trades", satisfactory),
        ("Number Trades 60+ Ever", trades60),
        ("Number Trades 90+ Ever", trades90),
        ("Percent Trades Never Delinquent", never_delq),
        ("Months Since Last Delinquency", msld),
        ("Max Delinquency Last 12M", max_delq_12m),
        ("Max Delinquency Ever", max_delq_ever),
        ("Number of Total Trades", total_trades),
        ("Number Trades Open in Last 12M", open_12m),
        ("Percent Installment Trades", pct_install),
        ("Months Since Most Recent Inquiry", inq_recent),
        ("Number of Inquiries in the Last 6 months", inq_6m),
        ("Number of Inquiries Last 6M excl 7 days", inq_6m_excl),
        ("Net Fraction Revolving Burden", nfrb),
        ("Net Fraction Installment Burden", nfib),
        ("Number Revolving Trades with Balance", revolving_bal),
        ("Number Installment Trades with Balance", install_bal),
        ("Number Bank/Natl Trades High Utilization", high_util),
        ("Percent Trades with Balance", pct_bal),
    ]
    for i, (name, col) in enumerate(columns):
        columns[i] = (name, np.where(blank, -9, col))

    def z(x):
        return (x - x.mean()) / x.std()

    logit = (
        1.7 * z(ere.astype(float))
        + 0.7 * z(amif.astype(float))
        - 0.6 * z(nfrb.astype(float))
        + 0.25 * z(msld.astype(float))
        - 0.2 * z(inq_6m.astype(float))
        + 0.1 * rng.normal(size=n)
    )
    good = rng.random(n) < 1 / (1 + np.exp(-logit))
    good = np.where(blank, rng.random(n) < 0.5, good)

    out = sys.stdout
    out.write(",".join(["Risk Performance"] + [c for c, _ in columns]) + "\n")
    for r in range(n):
        label = "Good" if good[r] else "Bad"
        out.write(",".join([label] + [str(int(col[r])) for _, col in columns]) + "\n")


if __name__ == "__main__":
    main()
