#include <gtest/gtest.h>

#include <random>

#include "jam/codec.hpp"
#include "support/oracles.hpp"

using namespace jam;

namespace {
const FrameClock kClock(120, 0.0);  // 125 ms frames
}

TEST(Monophonize, FirstOnsetInFrameWins) {
    std::vector<NoteEvent> ev{{60, 3 * 125.0 + 10, 3 * 125.0 + 100}, {64, 3 * 125.0 + 20, 3 * 125.0 + 110}};
    const auto m = monophonize(ev, kClock, 5);
    EXPECT_EQ(m[3], MelodyToken::onset(60));
    EXPECT_EQ(m[4], MelodyToken::rest());
}

TEST(Monophonize, EmptyIsAllRest) {
    const auto m = monophonize({}, kClock, 6);
    ASSERT_EQ(m.size(), 6u);
    for (auto t : m) EXPECT_TRUE(t.is_rest());
}

TEST(Monophonize, ThreeFrameNote) {
    std::vector<NoteEvent> ev{{67, 0.0, 3 * 125.0}};
    const auto m = monophonize(ev, kClock, 5);
    EXPECT_EQ(m, (std::vector<MelodyToken>{MelodyToken::onset(67), MelodyToken::hold(), MelodyToken::hold(),
                                           MelodyToken::rest(), MelodyToken::rest()}));
}

TEST(Monophonize, OpenNoteHoldsAndLaterOnsetTruncates) {
    std::vector<NoteEvent> ev{{60, 0.0, std::nullopt}, {62, 2 * 125.0 + 1, 2 * 125.0 + 2}};
    const auto m = monophonize(ev, kClock, 4);
    EXPECT_EQ(m, (std::vector<MelodyToken>{MelodyToken::onset(60), MelodyToken::hold(), MelodyToken::onset(62),
                                           MelodyToken::rest()}));
}

TEST(Monophonize, RejectsMalformedEvents) {
    EXPECT_THROW(monophonize(std::vector<NoteEvent>{{60, 100.0, 50.0}}, kClock, 4), CodecError);
    EXPECT_THROW(monophonize(std::vector<NoteEvent>{{60, 100.0, 100.0}}, kClock, 4), CodecError);
    EXPECT_THROW(monophonize(std::vector<NoteEvent>{{200, 100.0, 150.0}}, kClock, 4), CodecError);
    EXPECT_THROW(monophonize(std::vector<NoteEvent>{{60, -1.0, 150.0}}, kClock, 4), CodecError);
}

TEST(Monophonize, MatchesBruteForceOracle) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 300; ++trial) {
        const double start = 1000.0 + trial;
        const FrameClock clock(97.0 + trial % 50, start);
        const auto events = oracle::random_events(rng, start, clock.frame_duration(), 24);
        ASSERT_EQ(monophonize(events, clock, 24), oracle::monophonize(events, start, clock.frame_duration(), 24))
            << "trial " << trial;
    }
}

TEST(Interleave, Examples) {
    FrameGrid one{{MelodyToken::onset(60)}, {ChordToken::symbol(0, Quality::maj)}};
    const auto seq = interleave(one);
    ASSERT_EQ(seq.size(), 2u);
    EXPECT_EQ(std::get<MelodyToken>(seq[0]), MelodyToken::onset(60));
    EXPECT_EQ(std::get<ChordToken>(seq[1]), ChordToken::symbol(0, Quality::maj));
    EXPECT_EQ(deinterleave({}).frames(), 0u);

    FrameGrid two{{MelodyToken::onset(60), MelodyToken::hold()}, {ChordToken::no_chord(), ChordToken::hold()}};
    const auto seq2 = interleave(two);
    ASSERT_EQ(seq2.size(), 4u);
    EXPECT_TRUE(std::holds_alternative<MelodyToken>(seq2[0]));
    EXPECT_TRUE(std::holds_alternative<MelodyToken>(seq2[2]));
}

TEST(Interleave, RoundTripProperty) {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 200; ++trial) {
        FrameGrid g;
        g.melody = oracle::random_melody(rng, rng() % 40);
        for (std::size_t f = 0; f < g.melody.size(); ++f) {
            const auto r = rng() % 3;
            g.chords.push_back(r == 0 ? ChordToken::no_chord()
                               : r == 1 ? ChordToken::hold()
                                        : ChordToken::from_symbol_index(static_cast<int>(rng() % 84)));
        }
        ASSERT_EQ(deinterleave(interleave(g)), g);
    }
}

TEST(Interleave, MismatchReportsIndex) {
    std::vector<Token> bad{ChordToken::no_chord()};
    try {
        deinterleave(bad);
        FAIL();
    } catch (const CodecError& e) {
        EXPECT_EQ(e.index(), 0u);
    }
    std::vector<Token> bad2{MelodyToken::rest(), ChordToken::hold(), MelodyToken::rest(), MelodyToken::rest()};
    try {
        deinterleave(bad2);
        FAIL();
    } catch (const CodecError& e) {
        EXPECT_EQ(e.index(), 3u);
    }
    std::vector<Token> odd{MelodyToken::rest()};
    EXPECT_THROW(deinterleave(odd), CodecError);
}

TEST(Voicing, Examples) {
    EXPECT_EQ(voice_chord(ChordToken::symbol(0, Quality::maj)), (std::vector<int>{48, 52, 55}));
    EXPECT_EQ(voice_chord(ChordToken::symbol(9, Quality::min)), (std::vector<int>{57, 60, 64}));
    EXPECT_EQ(voice_chord(ChordToken::symbol(5, Quality::min)), (std::vector<int>{53, 56, 60}));
    EXPECT_THROW(voice_chord(ChordToken::hold()), CodecError);
    EXPECT_THROW(voice_chord(ChordToken::no_chord()), CodecError);
}

TEST(Voicing, PitchClassesMatchTemplate) {
    for (int i = 0; i < kSymbolCount; ++i) {
        const auto c = ChordToken::from_symbol_index(i);
        PitchClassSet pcs;
        for (int p : voice_chord(c)) {
            EXPECT_GE(p, 48);
            pcs.set(static_cast<std::size_t>(p % 12));
        }
        EXPECT_EQ(pcs, chord_pcs(c));
        EXPECT_EQ(chord_pcs(c).count(), quality_intervals(c.quality()).size());
        for (int iv : oracle::intervals(static_cast<int>(c.quality()))) {
            EXPECT_TRUE(chord_pcs(c).test(static_cast<std::size_t>((c.root() + iv) % 12)));
        }
    }
}

TEST(ChordPcs, Examples) {
    EXPECT_EQ(chord_pcs(ChordToken::symbol(0, Quality::maj)), PitchClassSet("000010010001"));
    PitchClassSet d7;
    for (int pc : {2, 6, 9, 0}) d7.set(static_cast<std::size_t>(pc));
    EXPECT_EQ(chord_pcs(ChordToken::symbol(2, Quality::dom7)), d7);
    EXPECT_THROW(chord_pcs(ChordToken::hold()), CodecError);
}

TEST(SoundingPitches, CarriesThroughHolds) {
    std::vector<MelodyToken> m{MelodyToken::hold(), MelodyToken::onset(62), MelodyToken::hold(), MelodyToken::rest()};
    const auto s = sounding_pitches(m);
    EXPECT_EQ(s, (std::vector<std::optional<int>>{std::nullopt, 62, 62, std::nullopt}));
}
