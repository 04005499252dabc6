#!/usr/bin/env python3
"""Builds the two-chain replay fixture and its golden outputs.

Everything here is derived from the scenario tables below: which deposit
pairs with which fill is known by construction, so the goldens do not
depend on the Rust matcher. Run from the repository root:

    python3 tools/gen_fixtures.py [OUT_DIR]   (default: fixtures)
"""

import datetime as dt
import json
import os
import shutil
import sys
from decimal import Decimal, ROUND_HALF_UP, getcontext

sys.path.insert(0, os.path.dirname(__file__))
from keccak import keccak256  # noqa: E402

getcontext().prec = 28

WINDOW = (1717200000, 1735603200)
GENESIS_TS = 1717000000
HEAD_TS = 1735900000
MAX_CHUNK = 20
DAY = 86400

CHAINS = {
    "chainA": {"id": 1, "layer": "L1"},
    "chainB": {"id": 10, "layer": "L2"},
}
ID_TO_NAME = {v["id"]: k for k, v in CHAINS.items()}


def h(s):
    return "0x" + keccak256(s.encode()).hex()


def addr(tag):
    return "0x" + keccak256(("addr:" + tag).encode()).hex()[-40:]


def w_uint(v):
    return "%064x" % v


def w_addr(a):
    return a[2:].rjust(64, "0")


def w_b32(x):
    return x[2:]


TOKENS = {
    # (chain, symbol) -> (address, decimals)
    ("chainA", "USDC"): (addr("A-USDC"), 6),
    ("chainB", "USDC"): (addr("B-USDC"), 6),
    ("chainA", "WETH"): (addr("A-WETH"), 18),
    ("chainB", "WETH"): (addr("B-WETH"), 18),
    ("chainA", "FOO"): (addr("A-FOO"), 18),
    ("chainB", "FOO"): (addr("B-FOO"), 18),
}


def tok(chain, sym):
    return TOKENS[(chain, sym)][0]


def units(sym, amount):
    dec = TOKENS[("chainA", sym)][1]
    v = Decimal(amount) * (Decimal(10) ** dec)
    assert v == v.to_integral_value()
    return int(v)


# ---------------------------------------------------------------- events


class Ev:
    """One log: ABI name, param list [(name, type, indexed, value)]."""

    def __init__(self, bridge, chain, contract, name, params, ts, tx, removed=False):
        self.bridge = bridge
        self.chain = chain
        self.contract = contract
        self.name = name
        self.params = params
        self.ts = ts
        self.tx = tx
        self.removed = removed
        self.block = None
        self.log_index = None

    def value(self, pname):
        for n, _, _, v in self.params:
            if n == pname:
                return v
        raise KeyError(pname)

    def signature(self):
        return "%s(%s)" % (self.name, ",".join(t for _, t, _, _ in self.params))

    def topics(self):
        out = [h(self.signature())]
        for _, t, ind, v in self.params:
            if ind:
                out.append("0x" + enc(t, v))
        return out

    def data(self):
        return "0x" + "".join(enc(t, v) for _, t, ind, v in self.params if not ind)

    def ref(self):
        return {
            "event": self.name,
            "chain_id": CHAINS[self.chain]["id"],
            "block_number": self.block,
            "log_index": self.log_index,
            "tx_hash": self.tx.hash,
        }


def enc(t, v):
    if t == "address":
        return w_addr(v)
    if t == "bytes32":
        return w_b32(v)
    if t.startswith("uint"):
        return w_uint(v)
    raise ValueError(t)


class Tx:
    def __init__(self, chain, seed, gas_used, gas_price):
        self.chain = chain
        self.hash = h("tx:" + seed)
        self.gas_used = gas_used
        self.gas_price = gas_price

    @property
    def fee(self):
        return self.gas_used * self.gas_price


TXS = []
EVENTS = []


def tx(chain, seed, gas_used, gwei):
    t = Tx(chain, seed, gas_used, int(Decimal(gwei) * 10**9))
    TXS.append(t)
    return t


def ev(*a, **k):
    e = Ev(*a, **k)
    EVENTS.append(e)
    return e


A, B = "chainA", "chainB"
CA, CB = CHAINS[A]["id"], CHAINS[B]["id"]
T0 = 1719792000  # 2024-07-01T00:00:00Z

# ------------------------------------------------ bridge contract layout

C = {
    "msgbridge": {A: addr("msg-router-A"), B: addr("msg-offramp-B")},
    "flatfee": {A: addr("flat-A"), B: addr("flat-B")},
    "taxi": {A: addr("taxi-A"), B: addr("taxi-B")},
    "busx": {A: addr("bus-A"), B: addr("bus-B")},
    "intentx": {A: addr("spoke-A"), B: addr("spoke-B")},
}

ABIS = {
    "MessageSent": [("messageId", "bytes32", True), ("sender", "address", True), ("receiver", "address", False),
                    ("token", "address", False), ("amount", "uint256", False), ("destChainId", "uint64", False)],
    "MessageExecuted": [("messageId", "bytes32", True), ("receiver", "address", True), ("token", "address", False),
                        ("amount", "uint256", False)],
    "Locked": [("nonce", "uint64", True), ("sender", "address", False), ("recipient", "address", False),
               ("token", "address", False), ("amount", "uint256", False), ("toChain", "uint256", False)],
    "Released": [("nonce", "uint64", True), ("recipient", "address", False), ("token", "address", False),
                 ("amount", "uint256", False), ("fromChain", "uint256", False)],
    "OFTSent": [("guid", "bytes32", True), ("fromAddress", "address", True), ("toAddress", "address", False),
                ("token", "address", False), ("amountSentLD", "uint256", False)],
    "OFTReceived": [("guid", "bytes32", True), ("toAddress", "address", True), ("token", "address", False),
                    ("amountReceivedLD", "uint256", False)],
    "BusRode": [("ticketId", "uint256", True), ("passenger", "address", False), ("receiver", "address", False),
                ("token", "address", False), ("amount", "uint256", False), ("dstChainId", "uint256", False)],
    "BusDriven": [("batchId", "uint256", True), ("startTicketId", "uint256", False),
                  ("numPassengers", "uint256", False), ("dstChainId", "uint256", False)],
    "BusArrived": [("batchId", "uint256", True), ("receiver", "address", False), ("token", "address", False),
                   ("amount", "uint256", False), ("srcChainId", "uint256", False)],
    "FundsDeposited": [("depositId", "uint256", True), ("depositor", "address", True),
                       ("recipient", "address", False), ("inputToken", "address", False),
                       ("inputAmount", "uint256", False), ("outputToken", "address", False),
                       ("outputAmount", "uint256", False), ("destinationChainId", "uint256", False)],
    "FilledRelay": [("depositId", "uint256", True), ("originChainId", "uint256", False),
                    ("relayer", "address", True), ("recipient", "address", False),
                    ("outputToken", "address", False), ("outputAmount", "uint256", False)],
}

FIELDS = {
    "MessageSent": ("deposit", {"id": "messageId", "sender": "sender", "recipient": "receiver", "token": "token",
                                "amount": "amount", "dst_chain": "destChainId"}),
    "MessageExecuted": ("withdrawal", {"id": "messageId", "recipient": "receiver", "token": "token",
                                       "amount": "amount"}),
    "Locked": ("deposit", {"id": "nonce", "sender": "sender", "recipient": "recipient", "token": "token",
                           "amount": "amount", "dst_chain": "toChain"}),
    "Released": ("withdrawal", {"id": "nonce", "recipient": "recipient", "token": "token", "amount": "amount",
                                "src_chain": "fromChain"}),
    "OFTSent": ("deposit", {"id": "guid", "sender": "fromAddress", "recipient": "toAddress", "token": "token",
                            "amount": "amountSentLD"}),
    "OFTReceived": ("withdrawal", {"id": "guid", "recipient": "toAddress", "token": "token",
                                   "amount": "amountReceivedLD"}),
    "BusRode": ("deposit", {"ticket": "ticketId", "sender": "passenger", "recipient": "receiver", "token": "token",
                            "amount": "amount", "dst_chain": "dstChainId"}),
    "BusDriven": ("dispatch", {"batch_id": "batchId", "start_ticket": "startTicketId", "seats": "numPassengers",
                               "dst_chain": "dstChainId"}),
    "BusArrived": ("transfer", {"batch_id": "batchId", "recipient": "receiver", "token": "token", "amount": "amount",
                                "src_chain": "srcChainId"}),
    "FundsDeposited": ("deposit", {"id": "depositId", "sender": "depositor", "recipient": "recipient",
                                   "token": "inputToken", "amount": "inputAmount", "dst_chain": "destinationChainId",
                                   "output_token": "outputToken", "output_amount": "outputAmount"}),
    "FilledRelay": ("fill", {"id": "depositId", "src_chain": "originChainId", "recipient": "recipient",
                             "token": "outputToken", "amount": "outputAmount", "solver": "relayer"}),
}

BRIDGES = {
    "msgbridge": {"adapter": "message_finality",
                  "events": {A: ["MessageSent"], B: ["MessageExecuted"]},
                  "tokens": [(A, "USDC"), (B, "USDC"), (A, "WETH"), (B, "WETH")]},
    "flatfee": {"adapter": "committee_flat_fee",
                "events": {A: ["Locked", "Released"], B: ["Locked", "Released"]},
                "tokens": [(A, "USDC"), (B, "USDC")]},
    "taxi": {"adapter": "pool_taxi",
             "events": {A: ["OFTSent"], B: ["OFTReceived"]},
             "tokens": [(A, "FOO"), (B, "FOO")]},
    "busx": {"adapter": "pool_bus",
             "events": {A: ["BusRode", "BusDriven", "BusArrived"], B: ["BusRode", "BusDriven", "BusArrived"]},
             "tokens": [(A, "USDC"), (B, "USDC")]},
    "intentx": {"adapter": "intent_fill",
                "events": {A: ["FundsDeposited"], B: ["FilledRelay"]},
                "tokens": [(A, "USDC"), (B, "USDC"), (A, "WETH"), (B, "WETH")]},
}


def mk(bridge, chain, name, values, ts, t, removed=False):
    params = [(n, ty, ind, values[n]) for n, ty, ind in ABIS[name]]
    return ev(bridge, chain, C[bridge][chain], name, params, ts, t, removed)


def user(tag):
    return addr("user:" + tag)


# Expected cctx pairs, in construction order: (bridge, cctx_id, src, dst, extra)
PAIRS = []
VIOLATIONS = []  # (bridge, kind, key)

# --- msgbridge: 3 transfers A -> B, the third pays a different recipient.
for i, (sym, amt_in, amt_out, day, lat, gwei_a, gwei_b) in enumerate([
    ("USDC", "1000", "999.5", 0, 1140, "12.5", "0.05"),
    ("WETH", "1.5", "1.4995", 3, 1260, "9", "0.04"),
    ("USDC", "40", "40", 5, 1200, "11", "0.06"),
]):
    mid = h("msgbridge:%d" % i)
    ts = T0 + day * DAY + 3600 * (i + 1)
    s_tx = tx(A, "msg-src-%d" % i, 180_000 + i * 1000, gwei_a)
    d_tx = tx(B, "msg-dst-%d" % i, 220_000, gwei_b)
    src = mk("msgbridge", A, "MessageSent", {
        "messageId": mid, "sender": user("m%d" % i), "receiver": user("m%d-r" % i),
        "token": tok(A, sym), "amount": units(sym, amt_in), "destChainId": CB}, ts, s_tx)
    recipient = user("m%d-r" % i) if i < 2 else user("mallory")
    dst = mk("msgbridge", B, "MessageExecuted", {
        "messageId": mid, "receiver": recipient, "token": tok(B, sym),
        "amount": units(sym, amt_out)}, ts + lat, d_tx)
    if i < 2:
        PAIRS.append(("msgbridge", "%d:%s" % (CA, mid), src, dst, {}))
    else:
        VIOLATIONS.append(("msgbridge", "recipient_mismatch", mid))

# --- flatfee: one transfer each way, flat 0.5 USDC fee.
for i, (sc, dc, nonce, amt, day, lat) in enumerate([(A, B, 41, "2500", 1, 900), (B, A, 7, "800", 2, 1500)]):
    ts = T0 + day * DAY + 7200
    s_tx = tx(sc, "flat-src-%d" % i, 95_000, "14" if sc == A else "0.03")
    d_tx = tx(dc, "flat-dst-%d" % i, 120_000, "0.02" if dc == B else "10")
    src = mk("flatfee", sc, "Locked", {
        "nonce": nonce, "sender": user("f%d" % i), "recipient": user("f%d-r" % i), "token": tok(sc, "USDC"),
        "amount": units("USDC", amt), "toChain": CHAINS[dc]["id"]}, ts, s_tx)
    dst = mk("flatfee", dc, "Released", {
        "nonce": nonce, "recipient": user("f%d-r" % i), "token": tok(dc, "USDC"),
        "amount": units("USDC", Decimal(amt) - Decimal("0.5")), "fromChain": CHAINS[sc]["id"]}, ts + lat, d_tx)
    PAIRS.append(("flatfee", "%d:%d" % (CHAINS[sc]["id"], nonce), src, dst, {}))

# --- taxi: one FOO transfer; FOO has no USD price.
guid = h("taxi:0")
ts = T0 + 4 * DAY + 600
src = mk("taxi", A, "OFTSent", {"guid": guid, "fromAddress": user("t0"), "toAddress": user("t0-r"),
                                "token": tok(A, "FOO"), "amountSentLD": 10**21}, ts,
         tx(A, "taxi-src", 150_000, "8"))
dst = mk("taxi", B, "OFTReceived", {"guid": guid, "toAddress": user("t0-r"), "token": tok(B, "FOO"),
                                    "amountReceivedLD": 10**21}, ts + 95, tx(B, "taxi-dst", 200_000, "0.01"))
PAIRS.append(("taxi", "%d:%s" % (CA, guid), src, dst, {}))

# --- busx: batch of three riders A -> B, then a single rider B -> A.
bus_ts = T0 + 6 * DAY
riders = []
for i in range(3):
    t = tx(A, "bus-ride-%d" % i, 110_000 + 500 * i, ["10", "11", "12"][i])
    riders.append(mk("busx", A, "BusRode", {
        "ticketId": 100 + i, "passenger": user("b%d" % i), "receiver": user("b%d-r" % i),
        "token": tok(A, "USDC"), "amount": units("USDC", ["150", "75.25", "9.9"][i]), "dstChainId": CB},
        bus_ts + 60 * i, t))
drive_tx = tx(A, "bus-drive-500", 300_000, "13")
drive = mk("busx", A, "BusDriven", {"batchId": 500, "startTicketId": 100, "numPassengers": 3, "dstChainId": CB},
           bus_ts + 600, drive_tx)
arrive_tx = tx(B, "bus-arrive-500", 260_000, "0.02")
arrivals = []
for i in range(3):
    arrivals.append(mk("busx", B, "BusArrived", {
        "batchId": 500, "receiver": user("b%d-r" % i), "token": tok(B, "USDC"),
        "amount": units("USDC", ["149.85", "75.17", "9.89"][i]), "srcChainId": CA}, bus_ts + 1500, arrive_tx))
for i in range(3):
    PAIRS.append(("busx", "%d:500:%d" % (CA, i), riders[i], arrivals[i],
                  {"batch": "500", "dispatch": drive}))

solo_ts = T0 + 7 * DAY + 1800
rider = mk("busx", B, "BusRode", {"ticketId": 7, "passenger": user("b9"), "receiver": user("b9-r"),
                                  "token": tok(B, "USDC"), "amount": units("USDC", "20"), "dstChainId": CA},
           solo_ts, tx(B, "bus-ride-b7", 105_000, "0.05"))
solo_drive = mk("busx", B, "BusDriven", {"batchId": 901, "startTicketId": 7, "numPassengers": 1, "dstChainId": CA},
                solo_ts + 30, tx(B, "bus-drive-901", 280_000, "0.05"))
solo_arrive = mk("busx", A, "BusArrived", {"batchId": 901, "receiver": user("b9-r"), "token": tok(A, "USDC"),
                                           "amount": units("USDC", "19.98"), "srcChainId": CB},
                 solo_ts + 900, tx(A, "bus-arrive-901", 190_000, "9.5"))
PAIRS.append(("busx", "%d:901:0" % CB, rider, solo_arrive, {"batch": "901", "dispatch": solo_drive}))

# --- intentx: deposits on A, fills on B.
ITS = T0 + 8 * DAY
intent_cases = [
    # id, in_sym, in_amt, out_sym, out_amt, deposit offset, fill offset (None = unfilled)
    (1, "WETH", "0.5", "WETH", "0.4996", 0, 14),
    (2, "USDC", "250", "USDC", "249.9", 3600, 3600 - 7),
    (3, "USDC", "5", "WETH", "0.002", 7200, 7200 + 9),
    (4, "USDC", "100", "USDC", "99.95", 10800, None),
]
for dep_id, isym, iamt, osym, oamt, doff, foff in intent_cases:
    d_tx = tx(A, "intent-dep-%d" % dep_id, 90_000 + dep_id, ["15", "13", "0.5", "10"][dep_id - 1])
    dep = mk("intentx", A, "FundsDeposited", {
        "depositId": dep_id, "depositor": user("i%d" % dep_id), "recipient": user("i%d-r" % dep_id),
        "inputToken": tok(A, isym), "inputAmount": units(isym, iamt), "outputToken": tok(B, osym),
        "outputAmount": units(osym, oamt), "destinationChainId": CB}, ITS + doff, d_tx)
    if foff is None:
        continue
    f_tx = tx(B, "intent-fill-%d" % dep_id, 70_000, "0.01")
    fill = mk("intentx", B, "FilledRelay", {
        "depositId": dep_id, "originChainId": CA, "relayer": addr("solver-%d" % (dep_id % 2)),
        "recipient": user("i%d-r" % dep_id), "outputToken": tok(B, osym), "outputAmount": units(osym, oamt)},
        ITS + foff, f_tx)
    PAIRS.append(("intentx", "%d:%d" % (CA, dep_id), dep, fill, {}))
# fill for a deposit that never happened on the source side
mk("intentx", B, "FilledRelay", {"depositId": 99, "originChainId": CA, "relayer": addr("solver-0"),
                                 "recipient": user("ghost"), "outputToken": tok(B, "USDC"),
                                 "outputAmount": units("USDC", "12")}, ITS + 20000, tx(B, "intent-fill-99", 70_000, "0.01"))
# a deposit log dropped by a reorg
mk("intentx", A, "FundsDeposited", {
    "depositId": 5, "depositor": user("i5"), "recipient": user("i5-r"), "inputToken": tok(A, "USDC"),
    "inputAmount": units("USDC", "60"), "outputToken": tok(B, "USDC"), "outputAmount": units("USDC", "59.9"),
    "destinationChainId": CB}, ITS + 14400, tx(A, "intent-dep-5", 90_005, "10"), removed=True)

# ------------------------------------------------------------ blocks


def build_blocks(chain, salt):
    ts = {GENESIS_TS, HEAD_TS, 1732247552}
    ts |= {e.ts for e in EVENTS if e.chain == chain}
    # filler blocks roughly every 4.5 days, irregular
    t = GENESIS_TS
    k = 0
    while t < HEAD_TS:
        t += 4 * DAY + (k * 7919 + salt) % 86400
        k += 1
        if t < HEAD_TS:
            ts.add(t)
    return sorted(ts)


BLOCKS = {c: build_blocks(c, s) for c, s in [(A, 1234), (B, 40321)]}
for e in EVENTS:
    e.block = BLOCKS[e.chain].index(e.ts)
# log indices: per block in (tx creation order, event order)
tx_order = {t.hash: i for i, t in enumerate(TXS)}
for c in CHAINS:
    by_block = {}
    for n, e in enumerate(EVENTS):
        if e.chain == c:
            by_block.setdefault(e.block, []).append((tx_order[e.tx.hash], n, e))
    for lst in by_block.values():
        for li, (_, _, e) in enumerate(sorted(lst, key=lambda x: (x[0], x[1]))):
            e.log_index = li
for t in TXS:
    blocks = {e.block for e in EVENTS if e.tx is t}
    assert len(blocks) == 1, t.hash
    t.block = blocks.pop()


def block_hash(chain, n):
    return h("block:%s:%d" % (chain, n))


def resolve(chain):
    ts = BLOCKS[chain]
    lo, hi = max(WINDOW[0], ts[0]), min(WINDOW[1], ts[-1])
    start = next(i for i, t in enumerate(ts) if t >= lo)
    end = max(i for i, t in enumerate(ts) if t <= hi)
    return start, end


def chunks(a, b, m):
    out = []
    while True:
        e = min(a + m - 1, b)
        out.append((a, e))
        if e == b:
            return out
        a = e + 1


# ------------------------------------------------------------ writers


def hexq(n):
    return hex(n)


def log_json(e):
    return {
        "address": e.contract,
        "topics": e.topics(),
        "data": e.data(),
        "blockNumber": hexq(e.block),
        "transactionHash": e.tx.hash,
        "logIndex": hexq(e.log_index),
        "blockHash": block_hash(e.chain, e.block),
        "transactionIndex": "0x0",
        "removed": e.removed,
    }


def rec(method, params, result):
    return json.dumps({"request": {"method": method, "params": params},
                       "response": {"jsonrpc": "2.0", "id": 1, "result": result}}, sort_keys=True)


def write_replay(root):
    for c in CHAINS:
        d = os.path.join(root, "replay", c)
        os.makedirs(d)
        ts = BLOCKS[c]
        with open(os.path.join(d, "blocks.jsonl"), "w") as f:
            f.write(rec("eth_blockNumber", [], hexq(len(ts) - 1)) + "\n")
            for n, t in enumerate(ts):
                f.write(rec("eth_getBlockByNumber", [hexq(n), False],
                            {"number": hexq(n), "timestamp": hexq(t), "hash": block_hash(c, n),
                             "parentHash": block_hash(c, n - 1) if n else "0x" + "00" * 32}) + "\n")
        with open(os.path.join(d, "receipts.jsonl"), "w") as f:
            for t in TXS:
                if t.chain != c:
                    continue
                f.write(rec("eth_getTransactionReceipt", [t.hash], {
                    "transactionHash": t.hash, "blockNumber": hexq(t.block), "gasUsed": hexq(t.gas_used),
                    "effectiveGasPrice": hexq(t.gas_price), "status": "0x1"}) + "\n")
        start, end = resolve(c)
        with open(os.path.join(d, "logs.jsonl"), "w") as f:
            for b in BRIDGES:
                names = BRIDGES[b]["events"][c]
                addrs = sorted({C[b][c]})
                topics = sorted({h(sig(n)) for n in names})
                for lo, hi in chunks(start, end, MAX_CHUNK):
                    logs = [log_json(e) for e in EVENTS
                            if e.chain == c and e.bridge == b and lo <= e.block <= hi]
                    params = [{"address": addrs, "fromBlock": hexq(lo), "toBlock": hexq(hi), "topics": [topics]}]
                    f.write(rec("eth_getLogs", params, logs) + "\n")


def sig(name):
    return "%s(%s)" % (name, ",".join(t for _, t, _ in ABIS[name]))


def abi_json(name):
    return json.dumps({"type": "event", "name": name, "anonymous": False,
                       "inputs": [{"name": n, "type": t, "indexed": i} for n, t, i in ABIS[name]]},
                      separators=(",", ":"))


def write_config(root):
    d = os.path.join(root, "config")
    os.makedirs(os.path.join(d, "bridges"))
    with open(os.path.join(d, "rpc.toml"), "w") as f:
        f.write("# Fixture chains. Endpoints are unused under --replay.\n")
        for c, v in CHAINS.items():
            f.write('\n[[chains]]\nchain_id = %d\nname = "%s"\nlayer = "%s"\nnative_symbol = "ETH"\n'
                    'rpc_urls = ["https://rpc.%s.invalid"]\nmax_chunk = %d\n'
                    % (v["id"], c, v["layer"], c.lower(), MAX_CHUNK))
    for b, spec in BRIDGES.items():
        lines = ['name = "%s"' % b, 'adapter = "%s"' % spec["adapter"], ""]
        for c, sym in spec["tokens"]:
            a, dec = TOKENS[(c, sym)]
            lines += ["[[tokens]]", "chain_id = %d" % CHAINS[c]["id"], 'address = "%s"' % a,
                      'symbol = "%s"' % sym, "decimals = %d" % dec, ""]
        for c in CHAINS:
            lines += ["[[contracts]]", "chain_id = %d" % CHAINS[c]["id"], 'address = "%s"' % C[b][c], ""]
            for name in spec["events"][c]:
                role, fields = FIELDS[name]
                fl = ", ".join('%s = "%s"' % kv for kv in fields.items())
                lines += ["[[contracts.events]]", 'role = "%s"' % role, "abi = '%s'" % abi_json(name),
                          "fields = { %s }" % fl, ""]
        with open(os.path.join(d, "bridges", b + ".toml"), "w") as f:
            f.write("\n".join(lines))


def date_of(ts):
    return dt.datetime.fromtimestamp(ts, dt.timezone.utc).date()


def eth_price(day):
    return Decimal(3000) + Decimal((day.toordinal() % 9) * 15) + Decimal("0.25")


PRICE_FIXED = {"USDC": Decimal(1), "WETH": Decimal(2725)}


def price(sym, day):
    if sym == "ETH":
        return eth_price(day)
    return PRICE_FIXED[sym]


def write_prices(root):
    d0, d1 = date_of(WINDOW[0]), date_of(WINDOW[1])
    rows = ["token,date,usd_price"]
    day = d0
    while day <= d1:
        for sym in ("ETH", "USDC", "WETH"):
            rows.append("%s,%s,%s" % (sym, day.isoformat(), price(sym, day)))
        day += dt.timedelta(days=1)
    with open(os.path.join(root, "prices.csv"), "w") as f:
        f.write("\n".join(rows) + "\n")


# ------------------------------------------------------------ goldens


def role_value(e, role):
    _, fields = FIELDS[e.name]
    return e.value(fields[role]) if role in fields else None


def cctx_json(bridge, cid, s, d, extra):
    o = {
        "cctx_id": cid, "bridge": bridge,
        "src_chain": CHAINS[s.chain]["id"], "dst_chain": CHAINS[d.chain]["id"],
        "src_tx_hash": s.tx.hash, "dst_tx_hash": d.tx.hash,
        "src_event": s.name, "dst_event": d.name,
        "src_block": s.block, "dst_block": d.block,
        "src_log_index": s.log_index, "dst_log_index": d.log_index,
        "src_timestamp": s.ts, "dst_timestamp": d.ts,
        "sender": role_value(s, "sender"), "recipient": role_value(s, "recipient"),
        "src_token": role_value(s, "token"), "dst_token": role_value(d, "token"),
        "amount_in": str(role_value(s, "amount")), "amount_out": str(role_value(d, "amount")),
        "src_tx_fee_wei": str(s.tx.fee), "src_gas_price_wei": str(s.tx.gas_price),
        "dst_tx_fee_wei": str(d.tx.fee),
        "n_src": None, "n_dst": None,
        "batch_id": extra.get("batch"),
        "dispatch_tx_hash": extra["dispatch"].tx.hash if "dispatch" in extra else None,
        "dispatch_fee_wei": str(extra["dispatch"].tx.fee) if "dispatch" in extra else None,
        "n_dispatch": None,
        "solver": role_value(d, "solver"),
        "flagged": None,
    }
    return o


def golden_cctxs():
    out = {}
    for b in BRIDGES:
        rows = [cctx_json(b, cid, s, d, x) for (bb, cid, s, d, x) in PAIRS if bb == b]
        for r in rows:
            r["n_src"] = sum(1 for o in rows if (o["src_chain"], o["src_tx_hash"]) == (r["src_chain"], r["src_tx_hash"]))
            r["n_dst"] = sum(1 for o in rows if (o["dst_chain"], o["dst_tx_hash"]) == (r["dst_chain"], r["dst_tx_hash"]))
            if r["dispatch_tx_hash"]:
                r["n_dispatch"] = sum(1 for o in rows if o["dispatch_tx_hash"] == r["dispatch_tx_hash"])
        rows.sort(key=lambda r: r["cctx_id"])
        out[b] = rows
    return out


def golden_extract():
    out = {}
    for b, spec in BRIDGES.items():
        per = {}
        for c in CHAINS:
            start, end = resolve(c)
            counts = {n: 0 for n in spec["events"][c]}
            removed = 0
            for e in EVENTS:
                if e.bridge == b and e.chain == c and start <= e.block <= end:
                    if e.removed:
                        removed += 1
                    else:
                        counts[e.name] += 1
            per[c] = {"start_block": start, "end_block": end, "events": counts, "removed_skipped": removed}
        out[b] = per
    return out


def golden_generate(cctxs):
    out = {}
    paired = {(id(s), id(d)) for (_, _, s, d, _) in PAIRS}
    used = set()
    for s, d in paired:
        used.add(s)
        used.add(d)
    for b in BRIDGES:
        srcs = [e for e in EVENTS if e.bridge == b and not e.removed
                and FIELDS[e.name][0] in ("deposit", "dispatch")]
        dsts = [e for e in EVENTS if e.bridge == b and not e.removed and FIELDS[e.name][0] in ("withdrawal", "transfer", "fill")]
        # deposit-side events on a chain the bridge delivers to are still source legs
        dispatch_used = {id(x["dispatch"]) for (bb, _, _, _, x) in PAIRS if bb == b and "dispatch" in x}
        un_src = [e for e in srcs if id(e) not in used and id(e) not in dispatch_used]
        un_dst = [e for e in dsts if id(e) not in used]
        key = lambda r: (r["event"], r["chain_id"], r["block_number"], r["log_index"], r["tx_hash"])
        out[b] = {
            "cctx_count": len(cctxs[b]),
            "unmatched_src": sorted((e.ref() for e in un_src), key=key),
            "unmatched_dst": sorted((e.ref() for e in un_dst), key=key),
            "violations": [{"kind": k, "key": kk} for (bb, k, kk) in VIOLATIONS if bb == b],
        }
    return out


def q(values, num, den):
    v = sorted(values)
    scaled = (len(v) - 1) * num
    lo, rem = divmod(scaled, den)
    if rem == 0 or lo + 1 >= len(v):
        return v[lo]
    return v[lo] + (Decimal(rem) / Decimal(den)) * (v[lo + 1] - v[lo])


def quart(values):
    q1, q2, q3 = q(values, 1, 4), q(values, 1, 2), q(values, 3, 4)
    return q1, q2, q3, q3 - q1


def fixed(d, dp):
    r = d.quantize(Decimal(1).scaleb(-dp), rounding=ROUND_HALF_UP)
    return format(r, "f")


def usd(d):
    return fixed(d, 6)


def secs(d):
    return fixed(d, 2)


TOKEN_INFO = {(CHAINS[c]["id"], a): (sym, dec) for (c, sym), (a, dec) in TOKENS.items()}


class Unpriced(Exception):
    pass


def value(chain, token, raw, ts):
    sym, dec = TOKEN_INFO[(chain, token)]
    day = date_of(ts)
    if sym not in PRICE_FIXED:
        raise Unpriced("no price for %s on %s" % (sym, day.isoformat()))
    return Decimal(int(raw)) / (Decimal(10) ** dec) * price(sym, day)


def native(wei, ts):
    return Decimal(int(wei)) / (Decimal(10) ** 18) * eth_price(date_of(ts))


def cost(c):
    vin = value(c["src_chain"], c["src_token"], c["amount_in"], c["src_timestamp"])
    vout = value(c["dst_chain"], c["dst_token"], c["amount_out"], c["dst_timestamp"])
    fee = native(c["src_tx_fee_wei"], c["src_timestamp"]) / c["n_src"]
    if c["dispatch_fee_wei"] is not None:
        fee += native(c["dispatch_fee_wei"], c["src_timestamp"]) / c["n_dispatch"]
    proto = vin - vout
    return {"value_in": vin, "value_out": vout, "src_fee": fee, "protocol": proto, "user": fee + proto}


def pearson(x, y):
    n = float(len(x))
    mx = 0.0
    for a in x:
        mx += a
    mx /= n
    my = 0.0
    for b in y:
        my += b
    my /= n
    sxy = sxx = syy = 0.0
    for a, b in zip(x, y):
        dx, dy = a - mx, b - my
        sxy += dx * dy
        sxx += dx * dx
        syy += dy * dy
    if sxx == 0 or syy == 0:
        return None
    import math
    r = sxy / (math.sqrt(sxx) * math.sqrt(syy))
    return max(-1.0, min(1.0, r))


def csv_line(cells):
    return ",".join(cells) + "\n"


def write_report(d, bridge, cctxs, group_by):
    os.makedirs(d, exist_ok=True)
    groups = {}
    unpriced = []
    priced = 0
    costs = {}
    for c in cctxs:
        if group_by == "pair":
            k = (c["src_chain"], c["dst_chain"])
            label = "%s->%s" % (ID_TO_NAME[k[0]], ID_TO_NAME[k[1]])
        else:
            k = (CHAINS[ID_TO_NAME[c["src_chain"]]]["layer"], CHAINS[ID_TO_NAME[c["dst_chain"]]]["layer"])
            label = "%s->%s" % k
        g = groups.setdefault(k, {"label": label, "lat": [], "cost": [], "value": Decimal(0)})
        g["lat"].append(Decimal(c["dst_timestamp"] - c["src_timestamp"]))
        try:
            b = cost(c)
        except Unpriced as e:
            unpriced.append((c["cctx_id"], str(e)))
            continue
        priced += 1
        costs[c["cctx_id"]] = b
        g["cost"].append(b["user"])
        g["value"] += b["value_in"]
    summaries = []
    with open(os.path.join(d, "summary_%s.csv" % group_by), "w") as f:
        f.write(csv_line(["group", "n", "n_priced", "total_value_usd", "latency_q1", "latency_q2", "latency_q3",
                          "latency_iqr", "cost_q1", "cost_q2", "cost_q3", "cost_iqr"]))
        for k in sorted(groups):
            g = groups[k]
            lat = quart(g["lat"])
            cq = quart(g["cost"]) if g["cost"] else None
            row = [g["label"], str(len(g["lat"])), str(len(g["cost"])), usd(g["value"])]
            row += [secs(x) for x in lat]
            row += [usd(x) for x in cq] if cq else ["", "", "", ""]
            f.write(csv_line(row))
            summaries.append({
                "group": g["label"], "n": len(g["lat"]), "n_priced": len(g["cost"]),
                "total_value_usd": usd(g["value"]),
                "latency": dict(zip(["q1", "q2", "q3", "iqr"], [secs(x) for x in lat])),
                "cost": dict(zip(["q1", "q2", "q3", "iqr"], [usd(x) for x in cq])) if cq else None,
            })
    series = [(c, costs[c["cctx_id"]]["user"]) for c in cctxs if c["cctx_id"] in costs]
    gas = [Decimal(int(c["src_gas_price_wei"])) for c, _ in series]
    fees = [u for _, u in series]

    def norm(v):
        if not v:
            return None
        lo, hi = min(v), max(v)
        if hi <= lo:
            return None
        return [(x - lo) / (hi - lo) for x in v]

    gn, fn = norm(gas), norm(fees)
    corr = pearson([float(x) for x in gas], [float(x) for x in fees]) if len(series) >= 2 else None
    with open(os.path.join(d, "fee_gas_series.csv"), "w") as f:
        f.write(csv_line(["cctx_id", "src_chain", "gas_price_wei", "user_cost_usd", "gas_price_norm",
                          "user_cost_norm"]))
        for i, (c, u) in enumerate(series):
            f.write(csv_line([c["cctx_id"], str(c["src_chain"]), c["src_gas_price_wei"], usd(u),
                              usd(gn[i]) if gn else "", usd(fn[i]) if fn else ""]))
    profits = [(c, costs[c["cctx_id"]]) for c in cctxs if c["cctx_id"] in costs and costs[c["cctx_id"]]["user"] < 0]
    profits.sort(key=lambda p: (p[1]["user"], p[0]["cctx_id"]))
    with open(os.path.join(d, "profit_cctxs.csv"), "w") as f:
        f.write(csv_line(["cctx_id", "bridge", "src_chain", "dst_chain", "value_in_usd", "value_out_usd",
                          "protocol_fee_usd", "src_tx_fee_usd", "user_cost_usd", "profit_usd"]))
        for c, b in profits:
            f.write(csv_line([c["cctx_id"], bridge, str(c["src_chain"]), str(c["dst_chain"]), usd(b["value_in"]),
                              usd(b["value_out"]), usd(b["protocol"]), usd(b["src_fee"]), usd(b["user"]),
                              usd(-b["user"])]))
    doc = {
        "bridge": bridge, "group_by": group_by, "cctx_count": len(cctxs), "priced": priced,
        "unpriced": [{"cctx_id": i, "reason": r} for i, r in unpriced],
        "profit_cctxs": len(profits),
        "fee_gas_correlation": ("%.6f" % corr) if corr is not None else None,
        "summaries": summaries,
    }
    with open(os.path.join(d, "summary_%s.json" % group_by), "w") as f:
        f.write(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def main():
    root = sys.argv[1] if len(sys.argv) > 1 else "fixtures"
    if os.path.exists(root):
        shutil.rmtree(root)
    os.makedirs(root)
    write_config(root)
    write_replay(root)
    write_prices(root)
    gold = os.path.join(root, "golden")
    os.makedirs(gold)
    cctxs = golden_cctxs()
    with open(os.path.join(gold, "cctxs.json"), "w") as f:
        f.write(json.dumps(cctxs, indent=2, sort_keys=True) + "\n")
    with open(os.path.join(gold, "extract.json"), "w") as f:
        f.write(json.dumps(golden_extract(), indent=2, sort_keys=True) + "\n")
    with open(os.path.join(gold, "generate.json"), "w") as f:
        f.write(json.dumps(golden_generate(cctxs), indent=2, sort_keys=True) + "\n")
    with open(os.path.join(gold, "window.json"), "w") as f:
        f.write(json.dumps({"start_ts": WINDOW[0], "end_ts": WINDOW[1]}, indent=2) + "\n")
    for b in BRIDGES:
        write_report(os.path.join(gold, "report", b), b, cctxs[b], "pair")
        write_report(os.path.join(gold, "report", b), b, cctxs[b], "layer")


if __name__ == "__main__":
    main()
