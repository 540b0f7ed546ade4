import numpy as np

from tracest import Method
from tracest.generators import AllOnes
from tracest.harness import first_passage_study

op = AllOnes(n=10000).generate()

if __name__ == "__main__":
    for method in (Method.HUTCHINSON, Method.GAUSSIAN, Method.UNIT_WITH_REPLACEMENT):
        passages = first_passage_study(op, method, eps=0.05, trials=100, workers=4)
        finite = [N for N in passages if N is not None]
        print(f"{method.label:>12}: mean N {np.mean(finite):8.2f}  max N {max(finite):6d}  "
              f"censored {len(passages) - len(finite)}")
