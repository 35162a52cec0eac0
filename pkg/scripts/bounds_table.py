"""Print the degree bound and linear-system sizes for the four Haar-batch geometries."""

from lonogo import bounds

GEOMETRIES = ((2, 0, 3, 0), (3, 1, 4, 1), (2, 0, 4, 0), (3, 1, 5, 1))

if __name__ == "__main__":
    print(f"{'N_T':>4} {'m':>3} {'n':>3} {'N':>3} {'V':>4} {'s':>4} {'K':>8} {'cols(d=4)':>12} {'rows(d=4)':>12}")
    for n, m, N, M in GEOMETRIES:
        print(f"{N - M:>4} {m:>3} {n:>3} {N:>3} {bounds.v_max(n, N):>4} {bounds.equation_count(n, m, N, M):>4} "
              f"{bounds.degree_upper_bound(n, m, N, M):>8} {bounds.column_bound(n, m, N, M, 4):>12} "
              f"{bounds.row_bound(n, m, N, M, 4):>12}")
