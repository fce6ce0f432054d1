"""Pure-Python mt19937_64 plus the bounded draw, shuffle and stream seeding
used by the library, written from the published generator definition."""

MASK = (1 << 64) - 1


class MT64:
    NN, MM = 312, 156
    MATRIX_A = 0xB5026F5AA96619E9
    UM, LM = 0xFFFFFFFF80000000, 0x7FFFFFFF

    def __init__(self, seed):
        self.mt = [0] * self.NN
        self.mt[0] = seed & MASK
        for i in range(1, self.NN):
            prev = self.mt[i - 1]
            self.mt[i] = (6364136223846793005 * (prev ^ (prev >> 62)) + i) & MASK
        self.mti = self.NN

    def _twist(self):
        mt = self.mt
        for i in range(self.NN):
            x = (mt[i] & self.UM) | (mt[(i + 1) % self.NN] & self.LM)
            xa = x >> 1
            if x & 1:
                xa ^= self.MATRIX_A
            mt[i] = mt[(i + self.MM) % self.NN] ^ xa
        self.mti = 0

    def next(self):
        if self.mti >= self.NN:
            self._twist()
        x = self.mt[self.mti]
        self.mti += 1
        x ^= (x >> 29) & 0x5555555555555555
        x ^= (x << 17) & 0x71D67FFFEDA60000
        x ^= (x << 37) & 0xFFF7EEE000000000
        x ^= x >> 43
        return x & MASK

    def below(self, bound):
        threshold = ((1 << 64) - bound) % bound
        while True:
            x = self.next()
            if x >= threshold:
                return x % bound

    def shuffle(self, items):
        for i in range(len(items), 1, -1):
            j = self.below(i)
            items[i - 1], items[j] = items[j], items[i - 1]


def mix64(z):
    z &= MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
    return z ^ (z >> 31)


def stream_seed(seed, stream):
    return mix64(seed + 0x9E3779B97F4A7C15 * (stream + 1))


def stratified_draw(pool, labels, k, rng):
    by_class = [[i for i in pool if labels[i] == c] for c in (0, 1)]
    n = len(pool)
    take = [k * len(b) // n for b in by_class]
    rem = [k * len(b) % n for b in by_class]
    order = [1, 0] if rem[1] > rem[0] else [0, 1]
    i = 0
    while sum(take) < k:
        take[order[i % 2]] += 1
        i += 1
    drawn = []
    for c in (0, 1):
        members = list(by_class[c])
        rng.shuffle(members)
        drawn += members[: take[c]]
    return sorted(drawn)


def stratified_split(labels, test_count, valid_count, seed):
    rng = MT64(seed)
    everything = list(range(len(labels)))
    test = stratified_draw(everything, labels, test_count, rng)
    rest = [i for i in everything if i not in set(test)]
    valid = stratified_draw(rest, labels, valid_count, rng)
    train = [i for i in rest if i not in set(valid)]
    return train, valid, test


def stratified_folds(labels, k, seed):
    rng = MT64(seed)
    fold = [0] * len(labels)
    offset = 0
    for c in (0, 1):
        members = [i for i, y in enumerate(labels) if y == c]
        rng.shuffle(members)
        for j, m in enumerate(members):
            fold[m] = (offset + j) % k
        offset += len(members)
    return fold
