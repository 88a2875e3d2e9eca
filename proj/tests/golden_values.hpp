#pragma once

// Frozen outputs of tests/oracles/golden.py (pure-Python secp256k1, RFC 6979,
// canonical JSON and Merkle pairing). Regenerate with that script, never from
// the library under test.
namespace golden {

inline constexpr const char* kPubKey1 = "0279be667ef9dcbbac55a06295ce870b07029bfcdb2dce28d959f2815b16f81798";
inline constexpr const char* kAddress1 = "vj129e562f73488c8a2bb9dbc5700b361d54b9b0554";
inline constexpr const char* kPubKey7 = "025cbdf0646e5db4eaa398f365f2ea7a0e3d419b7e0330e39ce92bddedcac4f9bc";
inline constexpr const char* kAddress7 = "vj1682aeeeb3ac1b8e77248c34fa57fcdef29d01c53";

// Key 1, SHA-256("Satoshi Nakamoto").
inline constexpr const char* kSatoshiNonce = "8f8a276c19f4149656b280621e358cce24f5f52542772691ee69063b74f15d15";
inline constexpr const char* kSatoshiSignature =
    "934b1ea10a4b3c1757e2b0c017d0b6143ce3c9a7e6a4a49860d7a6ab210ee3d8"
    "2442ce9d2b916064108014783e923ec36b49743e2ffa1c4496f01a512aafd9e5";

// TRANSFER key1 -> address7, amount 25, nonce 0, timestamp 1700000000, memo "fixture".
inline constexpr const char* kFixtureUnsigned =
    R"({"amount":25,"from":"vj129e562f73488c8a2bb9dbc5700b361d54b9b0554","kind":"TRANSFER","memo":"fixture","nonce":0,"public_key":"0279be667ef9dcbbac55a06295ce870b07029bfcdb2dce28d959f2815b16f81798","timestamp":1700000000,"to":"vj1682aeeeb3ac1b8e77248c34fa57fcdef29d01c53"})";
inline constexpr const char* kFixtureTxId = "f8d709687ba60e741aac669ed848e32d6c8a333990e5014651e63d3545f6f6f7";
inline constexpr const char* kFixtureSignature =
    "033aa05429d37eff07dc169c2b11e806629a2705f82328c8585d62847dce2635"
    "78e776196d86cca88a11df0112503c97348609c4f3f9a4184c567f9ca867e276";
inline constexpr const char* kFixtureLeaf = "37f904549d724f85ba6de2842ad8aea5167b3fbfc05c003bcb56a8ef8d42b189";

// Transactions i = 0..3: key1 -> address7, amount 10+i, nonce i, timestamp 1700000000+i, memo "m<i>".
inline constexpr const char* kMerkleFour = "aae3489783cfb599b8bccdfd4dd786f6915e6632e60e5d08e1908c1fd58f6d3c";
inline constexpr const char* kMerkleThree = "11e671f51365d8947a9d5a504620946ef26b093b9983f4b81cf8d020fc318a35";
inline constexpr const char* kMerkleOne = "f60de8e6da10508ac808d6a78759e865755c8ee424f325afbde527e84226752d";

inline constexpr const char* kEmptySha256 = "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855";

// Genesis with validators [address1].
inline constexpr const char* kGenesisHeaderBytes =
    R"({"height":0,"merkle_root":"e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855","prev_hash":"0000000000000000000000000000000000000000000000000000000000000000","proposer":"vj129e562f73488c8a2bb9dbc5700b361d54b9b0554","timestamp":0})";
inline constexpr const char* kGenesisHash = "4c57f28fdce569bc82a8171812e41f1aa5d73d30ef8b246a325f5ba409f77282";
inline constexpr const char* kGenesisHeight1Hash = "00fd030fcffea97dfc1c8627dc34a4e6fd50e73b57dcd390c2cbae5b2258c1de";

}  // namespace golden
