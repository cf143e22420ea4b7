#include <gtest/gtest.h>

#include <random>

#include "jam/kv.hpp"
#include "jam/record.hpp"
#include "jam/wire.hpp"
#include "support/oracles.hpp"

using namespace jam;

namespace {

JamRequest sample_request() {
    JamRequest r;
    r.session_id = "s1";
    r.target_frame = 2;
    r.settings.temperature = 0.25;
    r.settings.seed = 18446744073709551615ULL;
    r.melody = {MelodyToken::onset(60), MelodyToken::hold()};
    r.chords = {ChordToken::no_chord(), ChordToken::hold()};
    r.committed = {{2, ChordToken::symbol(0, Quality::maj)}, {3, ChordToken::hold()}};
    return r;
}

WireError decode_error(std::string_view body) {
    auto d = decode(body);
    EXPECT_TRUE(std::holds_alternative<WireError>(d)) << body;
    return std::holds_alternative<WireError>(d) ? std::get<WireError>(d) : WireError{};
}

}  // namespace

TEST(Kv, SerializeParseRoundTrip) {
    KvDocument doc;
    doc.set("a", std::string("x y"));
    doc.set("n", std::int64_t{-5});
    doc.set("u", std::uint64_t{18446744073709551615ULL});
    doc.set("d", 0.1);
    doc.set("b", true);
    doc.set("empty", std::string());
    const auto text = doc.serialize();
    EXPECT_EQ(text, "a=x y\nn=-5\nu=18446744073709551615\nd=0.1\nb=1\nempty=\n");
    const auto back = KvDocument::parse(text);
    EXPECT_EQ(back.entries(), doc.entries());
    EXPECT_EQ(parse_double(back.at("d")), 0.1);
}

TEST(Kv, ParseRejectsMalformed) {
    for (const char* bad : {"a=1", "a=1\na=2\n", "A=1\n", "=1\n", "a\n", "a b=1\n", "a=1\r\n"}) {
        EXPECT_THROW(KvDocument::parse(bad), KvError) << bad;
    }
}

TEST(Kv, Scalars) {
    EXPECT_EQ(parse_int("-12"), -12);
    EXPECT_THROW(parse_int("1.5"), KvError);
    EXPECT_THROW(parse_int(""), KvError);
    EXPECT_THROW(parse_uint("-1"), KvError);
    EXPECT_TRUE(parse_bool("1"));
    EXPECT_THROW(parse_bool("true"), KvError);
    EXPECT_THROW(parse_double("nan"), KvError);
    for (double v : {0.0, 1.0 / 3.0, 125.0, 1e-300, 6.02e23}) EXPECT_EQ(parse_double(format_double(v)), v);
}

TEST(Framing, DecoderHandlesSplitsAndBatches) {
    const std::string stream = encode_frame("abc") + encode_frame("") + encode_frame("de\nf");
    for (std::size_t chunk = 1; chunk <= stream.size(); ++chunk) {
        FrameDecoder dec;
        std::vector<std::string> got;
        for (std::size_t i = 0; i < stream.size(); i += chunk) {
            dec.feed(std::string_view(stream).substr(i, chunk));
            while (auto b = dec.next()) got.push_back(*b);
        }
        ASSERT_EQ(got, (std::vector<std::string>{"abc", "", "de\nf"})) << chunk;
        EXPECT_EQ(dec.buffered(), 0u);
    }
}

TEST(Framing, RejectsBadPrefixes) {
    for (const char* bad : {"x\n", "-1\n", "01\na", "99999999999\n"}) {
        FrameDecoder dec(1024);
        dec.feed(bad);
        EXPECT_THROW(dec.next(), KvError) << bad;
    }
}

TEST(Wire, RequestRoundTrip) {
    const auto req = sample_request();
    const auto body = encode(req);
    EXPECT_NE(body.find("committed=2@0:maj 3@H\n"), std::string::npos);
    auto d = decode(body);
    ASSERT_TRUE(std::holds_alternative<WireMessage>(d));
    EXPECT_EQ(std::get<JamRequest>(std::get<WireMessage>(d)), req);
}

TEST(Wire, ResponseAndErrorRoundTrip) {
    JamResponse resp;
    resp.session_id = "s1";
    resp.target_frame = 28;
    resp.chords = {ChordToken::symbol(0, Quality::maj), ChordToken::hold(), ChordToken::no_chord()};
    resp.voicings = {{48, 52, 55}, {}, {}};
    resp.warm_start = WarmStart{0, {ChordToken::symbol(7, Quality::dom7), ChordToken::hold()}};
    resp.gen_ms = 0.375;
    auto d = decode(encode(resp));
    ASSERT_TRUE(std::holds_alternative<WireMessage>(d));
    EXPECT_EQ(std::get<JamResponse>(std::get<WireMessage>(d)), resp);

    const WireError err{WireError::Code::inconsistent_history, "melody covers 3 frames"};
    d = decode(encode(err));
    ASSERT_TRUE(std::holds_alternative<WireMessage>(d));
    EXPECT_EQ(std::get<WireError>(std::get<WireMessage>(d)), err);
}

TEST(Wire, RandomRequestRoundTrip) {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 100; ++trial) {
        JamRequest r;
        r.session_id = "session-" + std::to_string(trial);
        r.melody = oracle::random_melody(rng, rng() % 50);
        r.target_frame = static_cast<FrameIndex>(r.melody.size());
        for (std::size_t f = 0; f < r.melody.size(); ++f) {
            r.chords.push_back(ChordToken::from_symbol_index(static_cast<int>(rng() % 84)));
        }
        r.settings.temperature = static_cast<double>(rng() % 1000) / 7.0;
        r.settings.seed = rng();
        auto d = decode(encode(r));
        ASSERT_TRUE(std::holds_alternative<WireMessage>(d));
        ASSERT_EQ(std::get<JamRequest>(std::get<WireMessage>(d)), r);
    }
}

TEST(Wire, SeedIsOptional) {
    std::string body = encode(sample_request());
    const auto at = body.find("seed=");
    body.erase(at, body.find('\n', at) - at + 1);
    auto d = decode(body);
    ASSERT_TRUE(std::holds_alternative<WireMessage>(d));
    EXPECT_FALSE(std::get<JamRequest>(std::get<WireMessage>(d)).seed_present);
}

TEST(Wire, MalformedBodies) {
    const std::string good = encode(sample_request());
    auto replace = [&](std::string_view from, std::string_view to) {
        std::string s = good;
        s.replace(s.find(from), from.size(), to);
        return s;
    };
    const std::vector<std::string> bad{
        "",
        "type=request\n",
        "type=teapot\n",
        good + "extra=1\n",
        good + "seed=1\n",
        replace("melody=N60 H", "melody=N60 Q"),
        replace("chords=NC H", "chords=NC 13:maj"),
        replace("committed=2@0:maj", "committed=2:0:maj"),
        replace("target_frame=2", "target_frame=two"),
        replace("metronome_on=1", "metronome_on=yes"),
        replace("type=request\n", ""),
    };
    for (const auto& body : bad) EXPECT_EQ(decode_error(body).code, WireError::Code::malformed) << body;
}

TEST(Wire, KeyOrderIsCanonical) {
    const std::string body = encode(sample_request());
    const auto a = body.find("session_id="), b = body.find("target_frame="), c = body.find("committed=");
    EXPECT_LT(a, b);
    EXPECT_LT(b, c);
    EXPECT_EQ(body.rfind("type=request\n", 0), 0u);
}

TEST(Record, RoundTrip) {
    SessionRecord r;
    r.session_id = "jam-1";
    r.session_start = 1000.5;
    SessionSettings s2;
    s2.commit_beats = 2;
    r.settings = {{0, 40, SessionSettings{}}, {40, 64, s2}};
    r.melody.assign(64, MelodyToken::hold());
    r.melody[0] = MelodyToken::onset(60);
    r.chords.assign(64, ChordToken::hold());
    r.chords[0] = ChordToken::no_chord();
    r.warm_start = WarmStart{0, {ChordToken::symbol(0, Quality::maj)}};
    r.requests = {{1, 1000.5, 1250.5, 0.5}, {9, 1250.5, std::nullopt, 0.0}};
    r.underruns = {40, 41};
    const auto text = serialize_record(r);
    EXPECT_EQ(parse_record(text), r);
    EXPECT_EQ(serialize_record(parse_record(text)), text);
}

TEST(Record, RejectsInconsistentGrids) {
    SessionRecord r;
    r.session_id = "x";
    r.settings = {{0, 2, SessionSettings{}}};
    r.melody = {MelodyToken::onset(60), MelodyToken::hold()};
    r.chords = {ChordToken::no_chord()};
    EXPECT_THROW(parse_record(serialize_record(r)), KvError);
    EXPECT_THROW(parse_record("type=response\n"), KvError);
}
