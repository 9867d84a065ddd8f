"""Naive reference implementations used as independent oracles.

Plain Python loops only; nothing here calls into hrvload.
"""

import math


def mean(xs):
    return math.fsum(xs) / len(xs)


def pop_std(xs):
    m = mean(xs)
    return math.sqrt(math.fsum((x - m) ** 2 for x in xs) / len(xs))


def diffs(rr):
    return [rr[i + 1] - rr[i] for i in range(len(rr) - 1)]


def avnn(rr):
    return mean(rr)


def sdnn(rr):
    return pop_std(rr)


def rmssd(rr):
    d = diffs(rr)
    return math.sqrt(math.fsum(x * x for x in d) / len(d))


def sdsd(rr):
    return pop_std(diffs(rr))


def nn50(rr):
    count = 0
    for i in range(len(rr) - 1):
        if abs(rr[i + 1] - rr[i]) > 50:
            count += 1
    return count


def pnn50(rr):
    return nn50(rr) / len(rr)


def hrv_index(rr, bin_width=7.8125):
    bins = {}
    for x in rr:
        b = math.floor(x / bin_width)
        bins[b] = bins.get(b, 0) + 1
    return len(rr) / max(bins.values())


def rahr(rr):
    return mean([60000.0 / x for x in rr])


def rmhr(rr):
    best = 0.0
    for x in rr:
        best = max(best, 60000.0 / x)
    return best


ALL = {
    "avnn": avnn, "sdnn": sdnn, "rmssd": rmssd, "sdsd": sdsd, "nn50": nn50,
    "pnn50": pnn50, "hrv_index": hrv_index, "rahr": rahr, "rmhr": rmhr,
}


def pairwise_auc(scores, labels):
    """Probability a random positive outranks a random negative; ties count one half."""
    pos = [s for s, l in zip(scores, labels) if l]
    neg = [s for s, l in zip(scores, labels) if not l]
    wins = 0.0
    for p in pos:
        for n in neg:
            if p > n:
                wins += 1.0
            elif p == n:
                wins += 0.5
    return wins / (len(pos) * len(neg))


def flatten_auc(P, labels, classes=(0, 1, 2)):
    """(micro, macro) by explicit one-vs-rest binarization and pair counting."""
    flat_s, flat_l, per_class = [], [], []
    for j, c in enumerate(classes):
        s = [row[j] for row in P]
        l = [lab == c for lab in labels]
        per_class.append(pairwise_auc(s, l))
        flat_s += s
        flat_l += l
    return pairwise_auc(flat_s, flat_l), sum(per_class) / len(per_class)


def knn_scan(X, y, q, k, n_classes):
    """Exhaustive scan: neighbour indices (ties to lower index) and class vote shares."""
    dist = []
    for i, row in enumerate(X):
        s = 0.0
        for a, b in zip(row, q):
            s += (a - b) * (a - b)
        dist.append((math.sqrt(s), i))
    dist.sort()
    chosen = dist[:k]
    zero = [i for d, i in chosen if d == 0.0]
    votes = [0.0] * n_classes
    if zero:
        for i in zero:
            votes[y[i]] += 1.0
    else:
        for d, i in chosen:
            votes[y[i]] += 1.0 / d
    total = sum(votes)
    return [i for _, i in chosen], [v / total for v in votes]


def confusion(pred, true, k=3):
    cm = [[0] * k for _ in range(k)]
    for p, t in zip(pred, true):
        cm[t][p] += 1
    return cm
