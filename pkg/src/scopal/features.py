"""Per-game feature encoders mapping (observation, action) to fixed vectors.

Board games use indicator planes of the position *after* the candidate move
from the mover's perspective, plus a few line/threat counts; Nim adds
nim-sum indicators of the resulting piles; the two hidden-information games
are small enough for exact one-hot tabular features.

Feature vectors depend only on the mover's observation and the action, never
on hidden opponent information.
"""
from __future__ import annotations

import numpy as np

from .games import Game
from .games.breakthrough import Breakthrough
from .games.connect_four import COLS as C4_COLS, ROWS as C4_ROWS
from .games.liars_dice import ALL_BIDS, CHALLENGE, FACES
from .games.tictactoe import LINES

_KUHN_HIST = {(): 0, ("P",): 1, ("B",): 2, ("P", "B"): 3}


def _c4_windows() -> tuple[int, ...]:
    wins = []
    for r in range(C4_ROWS):
        for c in range(C4_COLS - 3):
            wins.append(sum(1 << ((c + i) * 7 + r) for i in range(4)))
    for c in range(C4_COLS):
        for r in range(C4_ROWS - 3):
            wins.append(sum(1 << (c * 7 + r + i) for i in range(4)))
    for c in range(C4_COLS - 3):
        for r in range(C4_ROWS - 3):
            wins.append(sum(1 << ((c + i) * 7 + r + i) for i in range(4)))
    for c in range(3, C4_COLS):
        for r in range(C4_ROWS - 3):
            wins.append(sum(1 << ((c - i) * 7 + r + i) for i in range(4)))
    return tuple(wins)


_C4_WINDOWS = _c4_windows()


def feature_dim(game: Game) -> int:
    name = game.name
    if name == "tictactoe":
        return 22
    if name == "connect4":
        return 90
    if isinstance(game, Breakthrough):
        return 2 * game.cols * game.rows + 7
    if name == "nim":
        return 24
    if name == "kuhn_poker":
        return 24
    if name == "liars_dice":
        return FACES * 13 * 13
    raise KeyError(f"no feature encoder for game {name!r}")


def features(game: Game, state, action) -> np.ndarray:
    name = game.name
    if name == "tictactoe":
        return _ttt(game, state, action)
    if name == "connect4":
        return _c4(game, state, action)
    if isinstance(game, Breakthrough):
        return _breakthrough(game, state, action)
    if name == "nim":
        return _nim(game, state, action)
    if name == "kuhn_poker":
        return _kuhn(game, state, action)
    if name == "liars_dice":
        return _liars_dice(game, state, action)
    raise KeyError(f"no feature encoder for game {name!r}")


def _ttt(game, state, action) -> np.ndarray:
    rel = list(game.observation(state, state.to_move)[2])
    rel[action] = 1  # the candidate move, mover-relative
    x = np.zeros(22)
    for i, v in enumerate(rel):
        if v == 1:
            x[i] = 1.0
        elif v == 2:
            x[9 + i] = 1.0
    wins = twos = threats = 0
    for a, b, c in LINES:
        m = (rel[a] == 1) + (rel[b] == 1) + (rel[c] == 1)
        o = (rel[a] == 2) + (rel[b] == 2) + (rel[c] == 2)
        if m == 3:
            wins += 1
        elif m == 2 and o == 0:
            twos += 1
        elif o == 2 and m == 0:
            threats += 1
    x[18] = float(wins)
    x[19] = float(twos)
    x[20] = float(threats)
    x[21] = 1.0
    return x


def _c4(game, state, action) -> np.ndarray:
    mine, theirs = game.observation(state, state.to_move)[2]
    both = mine | theirs
    height = ((both >> (action * 7)) & 0x3F).bit_count()
    mine |= 1 << (action * 7 + height)
    x = np.zeros(90)
    i = 0
    for r in range(C4_ROWS):
        for c in range(C4_COLS):
            bit = 1 << (c * 7 + r)
            if mine & bit:
                x[i] = 1.0
            elif theirs & bit:
                x[42 + i] = 1.0
            i += 1
    counts = [0, 0, 0, 0, 0]  # win4, m3, m2, o3, o2
    for w in _C4_WINDOWS:
        m = (mine & w).bit_count()
        o = (theirs & w).bit_count()
        if o == 0:
            if m == 4:
                counts[0] += 1
            elif m == 3:
                counts[1] += 1
            elif m == 2:
                counts[2] += 1
        elif m == 0:
            if o == 3:
                counts[3] += 1
            elif o == 2:
                counts[4] += 1
    x[84:89] = counts
    x[89] = 1.0
    return x


def _breakthrough(game: Breakthrough, state, action) -> np.ndarray:
    cols, rows = game.cols, game.rows
    rel = list(game.observation(state, state.to_move)[2])
    frm, to = game.relative_action(state, action)
    rel[frm] = 0
    rel[to] = 1
    n = cols * rows
    x = np.zeros(2 * n + 7)
    mine = theirs = 0
    my_best = their_best = 0
    for i, v in enumerate(rel):
        if v == 1:
            x[i] = 1.0
            mine += 1
            my_best = max(my_best, i // cols)
        elif v == 2:
            x[n + i] = 1.0
            theirs += 1
            their_best = max(their_best, rows - 1 - i // cols)
    total = 2 * cols
    x[2 * n] = mine / total
    x[2 * n + 1] = theirs / total
    x[2 * n + 2] = my_best / (rows - 1)
    x[2 * n + 3] = their_best / (rows - 1)
    x[2 * n + 4] = 1.0 if my_best == rows - 1 else 0.0       # this move wins
    x[2 * n + 5] = 1.0 if 2 in rel[cols:2 * cols] else 0.0   # enemy one step from goal
    x[2 * n + 6] = 1.0
    return x


def _nim(game, state, action) -> np.ndarray:
    piles = list(game.observation(state, state.to_move)[2])
    pile, take = action
    piles[pile] -= take
    x = np.zeros(24)
    offset = 0
    for i, count in enumerate(piles):
        x[offset + count] = 1.0
        offset += 2 + 2 * i  # pile capacities 1, 3, 5, 7
    nimsum = 0
    for count in piles:
        nimsum ^= count
    all_small = all(count <= 1 for count in piles)
    ones = sum(1 for count in piles if count == 1)
    x[20] = 1.0 if (not all_small and nimsum == 0) else 0.0
    x[21] = 1.0 if (all_small and ones % 2 == 1) else 0.0
    x[22] = 1.0 if all_small else 0.0
    x[23] = 1.0
    return x


def _kuhn(game, state, action) -> np.ndarray:
    own, hist = game.observation(state, state.to_move)[2]
    x = np.zeros(24)
    idx = (own * 4 + _KUHN_HIST[hist]) * 2 + (0 if action == "B" else 1)
    x[idx] = 1.0
    return x


def _liars_dice(game, state, action) -> np.ndarray:
    own, bids, _ = game.observation(state, state.to_move)[2]
    last = 0 if not bids else 1 + ALL_BIDS.index(bids[-1])
    act = 12 if action == CHALLENGE else ALL_BIDS.index(action)
    x = np.zeros(FACES * 13 * 13)
    x[((own - 1) * 13 + last) * 13 + act] = 1.0
    return x
