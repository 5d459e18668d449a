"""Cell encoding and register layout shared by every kernel.

A cell is a signed 64-bit word ``(payload << 3) | tag``.  Addresses carried in
REF/LST/STR payloads are region-qualified: heap addresses are plain indices,
table-area addresses have ``TABLE_BIT`` set.
"""

REF = 0
ATM = 1
INT = 2
NUMVAR = 3
LST = 4
STR = 5
TAG_MASK = 7

TAG_NAMES = {REF: "REF", ATM: "ATM", INT: "INT", NUMVAR: "NUMVAR", LST: "LST", STR: "STR"}

TABLE_BIT = 1 << 40
ADDR_MASK = TABLE_BIT - 1

INT_MIN = -(1 << 59)
INT_MAX = (1 << 59) - 1

# sharing modes
MODE_NONE = 0
MODE_HASHCONS = 1
MODE_ENHANCED = 2
MODES = {"none": MODE_NONE, "hashcons": MODE_HASHCONS, "enhanced": MODE_ENHANCED}

# subgoal-key hash flavors
FLAVOR_FULL = 0
FLAVOR_PREFIX3 = 1
FLAVORS = {"full": FLAVOR_FULL, "prefix3": FLAVOR_PREFIX3}

# table-area geometry
BLOCK_CELLS = 1 << 16
BLOCK_MASK = BLOCK_CELLS - 1
TERMS_TABLE_INIT = 256
SUBGOAL_TABLE_INIT = 256
ANSWER_TABLE_INIT = 8

# reserved capacities (cells); the arrays are zero-filled lazily by the OS,
# so only touched pages cost memory
HEAP_CELLS = 1 << 27
TRAIL_CELLS = 1 << 26
ARENA_CELLS = 1 << 28
WS_ROWS = 6
WS_CELLS = 1 << 23
MIN_CELLS = 1 << 20

# register file (one int64 array per store)
R_HTOP = 0
R_TRTOP = 1
R_ATOP = 2
R_AUSED = 3
R_LAST_ADDR = 4
R_LAST_SIZE = 5
R_LAST_PREV = 6
R_TERM_CELLS = 7
R_MODE = 8
R_FLAVOR = 9
R_TT_BASE = 10
R_TT_SIZE = 11
R_TT_COUNT = 12
R_TT_SLOTS = 13
R_TT_NODES = 14
R_ST_BASE = 15
R_ST_SIZE = 16
R_ST_COUNT = 17
R_COPIED = 18
R_STEPS = 19
R_COMBINES = 20
R_HITS = 21
R_MISSES = 22
R_COMPARES = 23
R_EXPANSIONS = 24
R_BUCKET_CELLS = 25
R_ANSWERS = 26
R_HC_CALLS = 27
R_BLOCK_EQS = 28
N_REGS = 32

# subgoal record: [key, next_in_bucket, sym, answer_table, state, A1..An]
SG_KEY = 0
SG_NEXT = 1
SG_SYM = 2
SG_ATAB = 3
SG_STATE = 4
SG_ARGS = 5

# answer table header: [buckets, nbuckets, count, first, last]
AT_BUCKETS = 0
AT_SIZE = 1
AT_COUNT = 2
AT_FIRST = 3
AT_LAST = 4
AT_HEADER = 5

# answer record: [key, next_in_bucket, next_in_order, ground_mask, A1..An]
AN_KEY = 0
AN_NEXT_BUCKET = 1
AN_NEXT = 2
AN_GROUND = 3
AN_ARGS = 4
