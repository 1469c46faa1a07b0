"""
Anchoring a root in a transaction output
========================================

"""

from bta.hashing import sha256
from bta.payload import PayloadPrefix, build_eth_data, build_op_return, parse_op_return, script_to_hex

root = sha256(b"a day's worth of documents")

# Plain layout: OP_RETURN, push 32 bytes, the root
plain = build_op_return(root)
print(script_to_hex(plain))

# Prefixed layout adds a magic byte, a version digit and two bytes
# identifying the server (taken from an MD5 of its hostname)
prefix = PayloadPrefix.for_host("stamper-01.example.org")
tagged = build_op_return(root, prefix)
print(script_to_hex(tagged), len(tagged), "bytes")

# Parsing gives both parts back
found_prefix, found_root = parse_op_return(tagged)
print(found_prefix.version, found_prefix.server_hex, found_root == root)

# Ethereum-style chains carry the same bytes as plain transaction data
print(build_eth_data(root, prefix).hex().upper())
