#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "agentrec/encoder.hpp"
#include "agentrec/types.hpp"

using namespace agentrec;

namespace {

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    REQUIRE(out.good());
    out << content;
}

double l2_norm(const EmbeddingVector& v) {
    double s = 0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

// Independent reference implementation used as the hash oracle.
std::uint64_t fnv_reference(const std::string& s) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

}  // namespace

TEST_CASE("fnv1a64 matches published reference vectors") {
    // Known FNV-1a 64-bit values for standard inputs.
    CHECK(fnv1a64("") == 14695981039346656037ULL);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
    CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);

    for (const std::string s : {"hello", "agent_0001", "x", "The quick brown fox"})
        CHECK(fnv1a64(s) == fnv_reference(s));
}

TEST_CASE("seeded fnv1a64 chains from an arbitrary basis") {
    const std::string data = "abc";
    // Seeding with the standard offset basis reproduces the plain hash.
    CHECK(fnv1a64(data.data(), data.size(), 14695981039346656037ULL) ==
          fnv1a64(data));
    // Different seeds give different hashes.
    CHECK(fnv1a64(data.data(), data.size(), 1) !=
          fnv1a64(data.data(), data.size(), 2));
}

TEST_CASE("tokenize lowercases and splits on non-alphanumeric ASCII") {
    CHECK(tokenize("Hello, World!") == std::vector<std::string>{"hello", "world"});
    CHECK(tokenize("a1_b2") == std::vector<std::string>{"a1", "b2"});
    CHECK(tokenize("") == std::vector<std::string>{});
    CHECK(tokenize("...!!") == std::vector<std::string>{});
    CHECK(tokenize("  spaced   out  ") == std::vector<std::string>{"spaced", "out"});
    CHECK(tokenize("MiXeD CaSe") == std::vector<std::string>{"mixed", "case"});
}

TEST_CASE("encode_text produces deterministic L2-normalized counts") {
    Encoder enc;  // default dim 256
    CHECK(enc.dim() == 256);

    const EmbeddingVector v1 = enc.encode_text("alpha beta gamma");
    const EmbeddingVector v2 = enc.encode_text("alpha beta gamma");
    CHECK(v1 == v2);
    CHECK(v1.size() == 256);
    CHECK(l2_norm(v1) == doctest::Approx(1.0).epsilon(1e-12));

    // Empty or token-free text maps to the zero vector.
    const EmbeddingVector z = enc.encode_text("");
    CHECK(l2_norm(z) == 0.0);
    CHECK(l2_norm(enc.encode_text("?!,.")) == 0.0);
}

TEST_CASE("encode_text bucket placement at small dimension") {
    // fnv("a") % 4 == 0 and fnv("b") % 4 == 1 (derived from the reference
    // implementation), so "a a b" counts to [2,1,0,0] before normalization.
    REQUIRE(fnv_reference("a") % 4 == 0);
    REQUIRE(fnv_reference("b") % 4 == 1);
    Encoder enc(4);
    const EmbeddingVector v = enc.encode_text("a a b");
    const double n = std::sqrt(5.0);
    CHECK(v[0] == doctest::Approx(2.0 / n).epsilon(1e-12));
    CHECK(v[1] == doctest::Approx(1.0 / n).epsilon(1e-12));
    CHECK(v[2] == 0.0);
    CHECK(v[3] == 0.0);
}

TEST_CASE("cosine hand values and edge cases") {
    CHECK(cosine({1, 0}, {0, 1}) == doctest::Approx(0.0));
    CHECK(cosine({1, 1}, {1, 1}) == doctest::Approx(1.0));
    CHECK(cosine({1, 2}, {2, 4}) == doctest::Approx(1.0));
    CHECK(cosine({1, 0}, {1, 1}) == doctest::Approx(1.0 / std::sqrt(2.0)));
    CHECK(cosine({0, 0}, {1, 1}) == 0.0);
    CHECK_THROWS_AS((void)cosine({1, 0}, {1, 0, 0}), std::invalid_argument);
}

TEST_CASE("encode_agent uses the full profile text") {
    Encoder enc;
    AgentRecord a;
    a.id = "a1";
    a.name = "searcher";
    a.description = "finds documents";
    a.tags = {"web", "lookup"};
    const EmbeddingVector direct = enc.encode_text(a.profile_text());
    CHECK(enc.encode_agent(a) == direct);
    // Tags affect the embedding.
    AgentRecord b = a;
    b.tags = {};
    CHECK(enc.encode_agent(b) != direct);
}

namespace {

CallingTree make_tree() {
    CallingTree t;
    t.session_id = "s1";
    t.session_query = "do things";
    CallNode root;
    root.node_id = "n1";
    root.agent_id = "A";
    root.timestamp = 0;
    CallNode c1;
    c1.node_id = "n2";
    c1.agent_id = "B";
    c1.timestamp = 2;
    c1.parent = "n1";
    CallNode c2;
    c2.node_id = "n3";
    c2.agent_id = "C";
    c2.timestamp = 1;
    c2.parent = "n1";
    t.nodes = {root, c1, c2};
    return t;
}

std::unordered_map<std::string, const AgentRecord*> index_of(
    const std::vector<AgentRecord>& pool) {
    std::unordered_map<std::string, const AgentRecord*> m;
    for (const auto& a : pool) m[a.id] = &a;
    return m;
}

}  // namespace

TEST_CASE("serialize_graph emits preorder with timestamp-ordered children") {
    std::vector<AgentRecord> pool(3);
    pool[0].id = "A"; pool[0].name = "alpha"; pool[0].description = "da";
    pool[1].id = "B"; pool[1].name = "bravo"; pool[1].description = "db";
    pool[2].id = "C"; pool[2].name = "charlie"; pool[2].description = "dc";
    const auto by_id = index_of(pool);

    const CallingTree t = make_tree();
    // C (timestamp 1) precedes B (timestamp 2).
    CHECK(serialize_graph(t, by_id) ==
          "alpha (da) CALLER->CALLEE charlie (dc) CALLER->CALLEE bravo (db)");
}

TEST_CASE("serialize_graph tie-breaks equal timestamps by node id") {
    std::vector<AgentRecord> pool(3);
    pool[0].id = "A"; pool[0].name = "alpha"; pool[0].description = "da";
    pool[1].id = "B"; pool[1].name = "bravo"; pool[1].description = "db";
    pool[2].id = "C"; pool[2].name = "charlie"; pool[2].description = "dc";
    const auto by_id = index_of(pool);

    CallingTree t = make_tree();
    t.nodes[1].timestamp = 1;  // both children now at timestamp 1
    t.nodes[2].timestamp = 1;
    // n2 (B) sorts before n3 (C) on node id.
    CHECK(serialize_graph(t, by_id) ==
          "alpha (da) CALLER->CALLEE bravo (db) CALLER->CALLEE charlie (dc)");
}

TEST_CASE("serialize_graph escapes closing parens and handles unknown agents") {
    std::vector<AgentRecord> pool(1);
    pool[0].id = "A";
    pool[0].name = "alpha";
    pool[0].description = "uses f(x) often";
    const auto by_id = index_of(pool);

    CallingTree t;
    t.session_id = "s2";
    CallNode root;
    root.node_id = "n1";
    root.agent_id = "A";
    CallNode kid;
    kid.node_id = "n2";
    kid.agent_id = "mystery";
    kid.parent = "n1";
    kid.timestamp = 1;
    t.nodes = {root, kid};

    CHECK(serialize_graph(t, by_id) ==
          "alpha (uses f(x\\) often) CALLER->CALLEE mystery ()");
}

TEST_CASE("serialize_graph of a deep chain nests left to right") {
    std::vector<AgentRecord> pool(3);
    pool[0].id = "A"; pool[0].name = "a"; pool[0].description = "1";
    pool[1].id = "B"; pool[1].name = "b"; pool[1].description = "2";
    pool[2].id = "C"; pool[2].name = "c"; pool[2].description = "3";
    const auto by_id = index_of(pool);

    CallingTree t;
    t.session_id = "s3";
    CallNode n1, n2, n3;
    n1.node_id = "n1"; n1.agent_id = "A"; n1.timestamp = 0;
    n2.node_id = "n2"; n2.agent_id = "B"; n2.timestamp = 1; n2.parent = "n1";
    n3.node_id = "n3"; n3.agent_id = "C"; n3.timestamp = 2; n3.parent = "n2";
    t.nodes = {n1, n2, n3};
    CHECK(serialize_graph(t, by_id) ==
          "a (1) CALLER->CALLEE b (2) CALLER->CALLEE c (3)");
}

TEST_CASE("sidecar vectors override hashing and reset the dimension") {
    const std::string path = "tmp_sidecar_basic.jsonl";
    write_file(path,
               "{\"id\": \"agent_x\", \"vector\": [1.0, 0.0, 0.0]}\n"
               "{\"id\": \"sess_1\", \"vector\": [0.0, 1.0, 0.0]}\n");
    Encoder enc;
    enc.load_sidecar(path);
    CHECK(enc.has_sidecar());
    CHECK(enc.dim() == 3);
    CHECK(enc.sidecar_digest() != "");

    AgentRecord a;
    a.id = "agent_x";
    a.name = "whatever";
    a.description = "text is ignored when the sidecar has the id";
    CHECK(enc.encode_agent(a) == EmbeddingVector{1.0, 0.0, 0.0});

    // Unknown agents fall back to hashing at the sidecar dimension.
    AgentRecord b;
    b.id = "agent_y";
    b.name = "fallback";
    const EmbeddingVector vb = enc.encode_agent(b);
    CHECK(vb.size() == 3);
    CHECK(l2_norm(vb) == doctest::Approx(1.0).epsilon(1e-12));

    CHECK(enc.encode_serialized("sess_1", "anything") ==
          EmbeddingVector{0.0, 1.0, 0.0});
    CHECK(enc.encode_serialized("sess_2", "a b c").size() == 3);
    std::remove(path.c_str());
}

TEST_CASE("sidecar duplicate ids keep the last vector and warn") {
    const std::string path = "tmp_sidecar_dup.jsonl";
    write_file(path,
               "{\"id\": \"x\", \"vector\": [1.0, 0.0]}\n"
               "{\"id\": \"x\", \"vector\": [0.0, 1.0]}\n");
    Encoder enc;
    enc.load_sidecar(path);
    AgentRecord a;
    a.id = "x";
    CHECK(enc.encode_agent(a) == EmbeddingVector{0.0, 1.0});
    CHECK(enc.sidecar_warnings().size() == 1);
    std::remove(path.c_str());
}

TEST_CASE("sidecar with ragged dimensions throws naming the ids") {
    const std::string path = "tmp_sidecar_ragged.jsonl";
    write_file(path,
               "{\"id\": \"x\", \"vector\": [1.0, 0.0]}\n"
               "{\"id\": \"y\", \"vector\": [1.0, 0.0, 0.0]}\n");
    Encoder enc;
    CHECK_THROWS_WITH_AS(enc.load_sidecar(path),
                         doctest::Contains("y"), std::runtime_error);
    std::remove(path.c_str());
}

TEST_CASE("sidecar digest is stable and content-sensitive") {
    const std::string p1 = "tmp_sidecar_d1.jsonl";
    const std::string p2 = "tmp_sidecar_d2.jsonl";
    write_file(p1, "{\"id\": \"x\", \"vector\": [1.0]}\n");
    write_file(p2, "{\"id\": \"x\", \"vector\": [2.0]}\n");
    Encoder a, b, c;
    a.load_sidecar(p1);
    b.load_sidecar(p1);
    c.load_sidecar(p2);
    CHECK(a.sidecar_digest() == b.sidecar_digest());
    CHECK(a.sidecar_digest() != c.sidecar_digest());
    std::remove(p1.c_str());
    std::remove(p2.c_str());
}

TEST_CASE("missing sidecar file throws a runtime error") {
    Encoder enc;
    CHECK_THROWS_AS(enc.load_sidecar("does_not_exist_anywhere.jsonl"),
                    std::runtime_error);
}
