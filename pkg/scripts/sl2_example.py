"""sl2, m = 1: generators, Hamiltonians, flows and the reduced KdV equation."""

from fracw.dsred import FractionalDS
from fracw.hamflow import flows, reduce_to_kdv, w_hamiltonians
from fracw.liealg import make_sl
from fracw.pva import format_lambda


def main():
    W = FractionalDS(make_sl(2), 1, "k").w_algebra()
    P1, P2 = W.presentations()
    print("generators")
    for nm, g in W.gammas.items():
        print(f"  {nm} = {g}")
    print("second bracket")
    for a in W.alg.generators:
        for b in W.alg.generators:
            print(f"  {{{a} L {b}}} = {format_lambda(P2.stored(a, b))}")
    Hs, _ = w_hamiltonians(W, 2)
    for i, h in enumerate(Hs):
        print(f"H{i} = {h}")
    print("flows of H0 under the second bracket")
    for nm, F in flows(P2, Hs[0]).items():
        print(f"  d{nm}/dt = {F}")
    eq, _, rep = reduce_to_kdv(W, Hs[0], [P2, P1])
    print("g_e + g_fz central:", rep.passed)
    print("e_ttt =", eq)


if __name__ == "__main__":
    main()
