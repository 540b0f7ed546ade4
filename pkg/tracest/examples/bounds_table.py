from tracest import TolerancePair, bound_report
from tracest.cli import render, report_rows

tol = TolerancePair(eps=0.05, delta=0.05)

if __name__ == "__main__":
    # Bounds for the data-fitting Gram matrix example: n=1000, r=200
    report = bound_report(tol, k_h=8.4669, k_g=0.0105, k_u=0.8553, n=1000, rank=200)
    print(render(report_rows(report), "table"))
