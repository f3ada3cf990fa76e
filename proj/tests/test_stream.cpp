// Copyright 2026 parstream Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <catch2/catch_amalgamated.hpp>

#include "parstream/stream.hpp"

using namespace parstream;

TEST_CASE("parse_trace maps fields directly", "[stream]") {
    const StreamTrace t = parse_trace("1,3,2\n2,2,3");
    CHECK(t.prompt_count == 0);
    REQUIRE(t.rounds.size() == 2);
    CHECK(t.rounds[0] == Round{1, 3, 2});
    CHECK(t.rounds[1] == Round{2, 2, 3});
}

TEST_CASE("parse_trace reads the optional prompt line", "[stream]") {
    const StreamTrace t = parse_trace("prompt,4\n1,3,2");
    CHECK(t.prompt_count == 4);
    REQUIRE(t.rounds.size() == 1);
    CHECK(t.rounds[0] == Round{1, 3, 2});
}

TEST_CASE("parse_trace rejects non-consecutive rounds", "[stream]") {
    CHECK_THROWS_WITH(parse_trace("1,3,2\n3,2,3"),
                      Catch::Matchers::ContainsSubstring("non-consecutive round index"));
}

TEST_CASE("parse_trace names the offending line", "[stream]") {
    CHECK_THROWS_WITH(parse_trace("1,3,2\n1,x,2"),
                      Catch::Matchers::ContainsSubstring("line 2"));
    CHECK_THROWS_AS(parse_trace("1,3"), ParseError);
    CHECK_THROWS_AS(parse_trace(""), ValidationError);
}

TEST_CASE("parse_trace tolerates blank lines and CRLF", "[stream]") {
    const StreamTrace t = parse_trace("prompt,1\r\n1,2,1\r\n\r\n2,1,1\r\n");
    CHECK(t.prompt_count == 1);
    REQUIRE(t.rounds.size() == 2);
    CHECK(t.rounds[1] == Round{2, 1, 1});
}

TEST_CASE("emit_trace writes canonical text", "[stream]") {
    StreamTrace t;
    t.rounds = {{1, 3, 2}};
    CHECK(emit_trace(t) == "1,3,2");
    t.prompt_count = 4;
    CHECK(emit_trace(t) == "prompt,4\n1,3,2");
}

TEST_CASE("emit_trace rejects invalid traces", "[stream]") {
    StreamTrace empty;
    CHECK_THROWS_AS(emit_trace(empty), ValidationError);
}

TEST_CASE("parse inverts emit on synthesized traces", "[stream]") {
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
        const StreamTrace t =
            synthesize_trace(seed, 1 + static_cast<int>(seed % 6), 5, 4);
        CHECK_NOTHROW(validate(t));
        const StreamTrace back = parse_trace(emit_trace(t));
        REQUIRE(back.prompt_count == t.prompt_count);
        REQUIRE(back.rounds == t.rounds);
    }
}

TEST_CASE("synthesize_trace is deterministic per seed", "[stream]") {
    const StreamTrace a = synthesize_trace(7, 3, 4, 4);
    const StreamTrace b = synthesize_trace(7, 3, 4, 4);
    CHECK(a.rounds == b.rounds);
    const StreamTrace c = synthesize_trace(8, 3, 4, 4);
    CHECK(a.rounds != c.rounds);
}

TEST_CASE("synthesize_trace validates its bounds", "[stream]") {
    CHECK_THROWS_AS(synthesize_trace(0, 0, 4, 4), ValidationError);
    CHECK_THROWS_AS(synthesize_trace(0, 1, 0, 4), ValidationError);
    CHECK_THROWS_AS(synthesize_trace(0, 1, 4, -1), ValidationError);
}

TEST_CASE("validate flags malformed traces", "[stream]") {
    StreamTrace t;
    t.rounds = {{1, 2, 1}};
    t.prompt_count = -1;
    CHECK_THROWS_AS(validate(t), ValidationError);
    t.prompt_count = 0;
    t.rounds = {{2, 2, 1}};
    CHECK_THROWS_AS(validate(t), ValidationError);
    t.rounds = {{1, -1, 1}};
    CHECK_THROWS_AS(validate(t), ValidationError);
    t.rounds = {{1, 0, 0}};
    CHECK_THROWS_AS(validate(t), ValidationError);
}

TEST_CASE("total_tokens sums prompt and rounds", "[stream]") {
    StreamTrace t;
    t.prompt_count = 2;
    t.rounds = {{1, 3, 2}, {2, 2, 3}};
    CHECK(t.total_tokens() == 12);
}

TEST_CASE("enumerate_tokens yields arrival order prompt, V1, A1, V2, A2", "[stream]") {
    StreamTrace t;
    t.prompt_count = 2;
    t.rounds = {{1, 2, 1}, {2, 1, 2}};
    const std::vector<TokenRef> toks = enumerate_tokens(t);
    REQUIRE(toks.size() == 8);
    for (std::size_t i = 0; i < toks.size(); ++i) {
        CHECK(toks[i].arrival == static_cast<int>(i));
    }
    CHECK(toks[0].is_prompt());
    CHECK(toks[1].is_prompt());
    CHECK((toks[2].group == Group::input && toks[2].round == 1 && toks[2].offset == 0));
    CHECK((toks[4].group == Group::output && toks[4].round == 1));
    CHECK((toks[5].group == Group::input && toks[5].round == 2));
    CHECK((toks[7].group == Group::output && toks[7].round == 2 && toks[7].offset == 1));
}

TEST_CASE("segment_size treats round 0 input as the prompt", "[stream]") {
    StreamTrace t;
    t.prompt_count = 3;
    t.rounds = {{1, 2, 1}};
    CHECK(segment_size(t, Group::input, 0) == 3);
    CHECK(segment_size(t, Group::input, 1) == 2);
    CHECK(segment_size(t, Group::output, 1) == 1);
}
