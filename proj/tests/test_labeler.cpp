#include "support/fixtures.hpp"
#include "support/label_examples.hpp"

#include <gtest/gtest.h>

#include <cctype>

using namespace warntriage;

namespace {

QualifierSlots var_slot(const std::string& v) {
    QualifierSlots s;
    s.variable = v;
    return s;
}

QualifierSlots ptr_slot(const std::string& p) {
    QualifierSlots s;
    s.pointer = p;
    return s;
}

QualifierSlots fn_slot(const std::string& f) {
    QualifierSlots s;
    s.function = f;
    return s;
}

WarningRecord at_line(WarningType t, int line, const std::string& file = "m.c", const std::string& code = "") {
    return make_record(Tool::Infer, t, file, line, std::nullopt, "f", "q", code.empty() ? "x;" : code);
}

DiffHunk added(const std::string& file, std::vector<std::pair<int, std::string>> lines) {
    DiffHunk h;
    h.file = file;
    h.added = std::move(lines);
    return h;
}

DiffHunk removed(const std::string& file, std::vector<std::pair<int, std::string>> lines) {
    DiffHunk h;
    h.file = file;
    h.removed = std::move(lines);
    return h;
}

AggregateLabel expected_class(int cm, int cc) {
    if (cm + cc > 3) return AggregateLabel::VTB;
    if (cm + cc >= 2) return AggregateLabel::LTB;
    return AggregateLabel::UTB;
}

int rank_of(AggregateLabel a) {
    switch (a) {
    case AggregateLabel::UTB: return 0;
    case AggregateLabel::LTB: return 1;
    case AggregateLabel::VTB: return 2;
    }
    return -1;
}

} // namespace

TEST(Semantic, SocketLeakMessageScoresThree) {
    auto ex = wt_test::socket_leak_example();
    QualifierSlots s;
    s.variable = "fd";
    s.function = "socket";
    EXPECT_EQ(semantic_score(WarningType::ResourceLeak, s, ex.message), 3);
}

TEST(Semantic, RefactorMessageScoresZero) {
    EXPECT_EQ(semantic_score(WarningType::NullDereference, ptr_slot("slot"),
                             wt_test::refactor_example().message),
              0);
}

TEST(Semantic, CommonKeywordOnly) {
    EXPECT_EQ(semantic_score(WarningType::NullDereference, ptr_slot("p"), "fix crash in parser"), 1);
}

TEST(Semantic, SlotIdentifierMatchesWholeWordsOnly) {
    EXPECT_EQ(semantic_score(WarningType::NullDereference, ptr_slot("p"), "guard p before use"), 2);
    EXPECT_EQ(semantic_score(WarningType::NullDereference, ptr_slot("p"), "update parser"), 0);
    EXPECT_EQ(semantic_score(WarningType::ResourceLeak, var_slot("fd"), "use fdopen here"), 0);
    EXPECT_EQ(semantic_score(WarningType::DeadStore, var_slot("Count"), "drop count"), 0);
}

TEST(Semantic, TypeKeywordsAreSubstrings) {
    EXPECT_EQ(semantic_score(WarningType::BufferOverflow, {}, "Prevent OVERFLOWS in copy"), 3);
    EXPECT_EQ(semantic_score(WarningType::UninitializedVariable, {}, "initialize the counter"), 3);
    EXPECT_EQ(semantic_score(WarningType::DeadStore, {}, "remove Unused local"), 3);
    // the keyword of one type does not count for another
    EXPECT_EQ(semantic_score(WarningType::DeadStore, {}, "overflow"), 0);
}

TEST(Semantic, InvariantUnderCaseChanges) {
    Rng rng(12);
    const std::vector<std::string> msgs = {
        "FIX: Socket leakage on error #6.", "refactor(server): Use a union", "Handle NULL pointer in parser",
        "remove dead store", "Initialize buffer before use", "bump version", "Eliminate redundant checks",
        "add null check for node"};
    for (int i = 0; i < 400; ++i) {
        auto m = msgs[rng.below(msgs.size())];
        auto t = kAllWarningTypes[rng.below(kAllWarningTypes.size())];
        auto base = semantic_score(t, {}, m);
        for (auto& c : m)
            if (rng.below(2)) c = static_cast<char>(std::isupper(static_cast<unsigned char>(c)) ? std::tolower(c)
                                                                                                : std::toupper(c));
        EXPECT_EQ(semantic_score(t, {}, m), base) << m;
    }
}

TEST(Structural, SocketLeakFixScoresTwo) {
    auto ex = wt_test::socket_leak_example();
    auto slots = parse_qualifier(ex.warning.wtype, ex.warning.qualifier);
    EXPECT_EQ(structural_score(ex.warning.wtype, slots, ex.warning, parse_unified_diff(ex.diff)), 2);
}

TEST(Structural, RefactorScoresScopeOnly) {
    auto ex = wt_test::refactor_example();
    auto slots = parse_qualifier(ex.warning.wtype, ex.warning.qualifier);
    EXPECT_EQ(structural_score(ex.warning.wtype, slots, ex.warning, parse_unified_diff(ex.diff)), 1);
}

TEST(Structural, UnrelatedFileScoresZero) {
    auto w = at_line(WarningType::NullDereference, 20);
    EXPECT_EQ(structural_score(w.wtype, ptr_slot("p"), w, {added("other.c", {{19, "if (!p) return;"}})}), 0);
}

TEST(Structural, EmptyHunksAlwaysZero) {
    Rng rng(4);
    for (int i = 0; i < 200; ++i) {
        auto t = kAllWarningTypes[rng.below(kAllWarningTypes.size())];
        auto w = at_line(t, 1 + static_cast<int>(rng.below(5000)));
        QualifierSlots s;
        s.variable = "v";
        s.pointer = "p";
        s.function = "strcpy";
        EXPECT_EQ(structural_score(t, s, w, {}), 0);
    }
}

TEST(FixPattern, ResourceFreedAfterAcquisition) {
    auto w = at_line(WarningType::ResourceLeak, 3651, "evhtp.c");
    EXPECT_TRUE(detect_fix_pattern(w.wtype, var_slot("fd"), w, {added("evhtp.c", {{3672, "evutil_closesocket(fd);"}})}));
    EXPECT_FALSE(detect_fix_pattern(w.wtype, var_slot("fd"), w, {added("evhtp.c", {{3640, "close(fd);"}})}));
    EXPECT_FALSE(detect_fix_pattern(w.wtype, var_slot("fd"), w, {added("evhtp.c", {{3660, "log_message(fd);"}})}));
    EXPECT_FALSE(detect_fix_pattern(w.wtype, var_slot("fd"), w, {added("evhtp.c", {{3660, "close(fd2);"}})}));
}

TEST(FixPattern, NullCheckBeforeDereference) {
    auto w = at_line(WarningType::NullDereference, 380);
    EXPECT_TRUE(detect_fix_pattern(w.wtype, ptr_slot("slot"), w, {added("m.c", {{375, "if (!slot) return NULL;"}})}));
    EXPECT_TRUE(detect_fix_pattern(w.wtype, ptr_slot("slot"), w,
                                   {added("m.c", {{375, "if (slot == NULL) goto out;"}})}));
    EXPECT_TRUE(detect_fix_pattern(w.wtype, ptr_slot("slot"), w, {added("m.c", {{375, "if (n && slot) {"}})}));
    EXPECT_FALSE(detect_fix_pattern(w.wtype, ptr_slot("slot"), w, {added("m.c", {{375, "slot = lookup(n);"}})}));
    EXPECT_FALSE(detect_fix_pattern(w.wtype, ptr_slot("slot"), w, {added("m.c", {{385, "if (!slot) return;"}})}));
    EXPECT_FALSE(detect_fix_pattern(w.wtype, ptr_slot("slot"), w, {added("m.c", {{375, "if (!slots) return;"}})}));
}

TEST(FixPattern, BoundedCounterpartReplacesUnsafeCall) {
    auto w = at_line(WarningType::BufferOverflow, 40);
    DiffHunk h;
    h.file = "m.c";
    h.removed = {{40, "strcpy(dst, src);"}};
    h.added = {{40, "strncpy(dst, src, sizeof(dst));"}};
    EXPECT_TRUE(detect_fix_pattern(w.wtype, fn_slot("strcpy"), w, {h}));

    DiffHunk wrong = h;
    wrong.added = {{40, "memcpy(dst, src, n);"}};
    EXPECT_FALSE(detect_fix_pattern(w.wtype, fn_slot("strcpy"), w, {wrong}));
    EXPECT_TRUE(detect_fix_pattern(w.wtype, fn_slot("strcpy"), w,
                                   {added("m.c", {{39, "if (strlen(src) >= sizeof(dst)) return -1;"}})}));
}

TEST(FixPattern, UninitializedAssignedBeforeUse) {
    auto w = at_line(WarningType::UninitializedVariable, 30);
    EXPECT_TRUE(detect_fix_pattern(w.wtype, var_slot("n"), w, {added("m.c", {{25, "int n = 0;"}})}));
    EXPECT_TRUE(detect_fix_pattern(w.wtype, var_slot("n"), w, {added("m.c", {{26, "read_value(fp, &n);"}})}));
    EXPECT_FALSE(detect_fix_pattern(w.wtype, var_slot("n"), w, {added("m.c", {{26, "if (n == 0) return;"}})}));
    EXPECT_FALSE(detect_fix_pattern(w.wtype, var_slot("n"), w, {added("m.c", {{35, "n = 0;"}})}));
}

TEST(FixPattern, DeadStoreUsedOrRemoved) {
    auto w = at_line(WarningType::DeadStore, 50, "m.c", "rc = run(ctx);");
    EXPECT_TRUE(detect_fix_pattern(w.wtype, var_slot("rc"), w, {added("m.c", {{52, "return rc;"}})}));
    EXPECT_TRUE(detect_fix_pattern(w.wtype, var_slot("rc"), w, {removed("m.c", {{50, "    rc = run(ctx);"}})}));
    EXPECT_FALSE(detect_fix_pattern(w.wtype, var_slot("rc"), w, {added("m.c", {{52, "rc = 1;"}})}));
}

TEST(Scope, DirectionAndWindow) {
    auto nd = at_line(WarningType::NullDereference, 380);
    EXPECT_TRUE(in_scope(nd.wtype, nd, {added("m.c", {{373, "x"}})}));
    EXPECT_TRUE(in_scope(nd.wtype, nd, {added("m.c", {{380, "x"}})}));
    EXPECT_FALSE(in_scope(nd.wtype, nd, {added("m.c", {{381, "x"}})}));
    EXPECT_FALSE(in_scope(nd.wtype, nd, {added("m.c", {{380 - 500, "x"}})}));

    auto rl = at_line(WarningType::ResourceLeak, 3651);
    EXPECT_TRUE(in_scope(rl.wtype, rl, {added("m.c", {{3672, "x"}})}));
    EXPECT_FALSE(in_scope(rl.wtype, rl, {added("m.c", {{3640, "x"}})}));
    EXPECT_FALSE(in_scope(rl.wtype, rl, {added("m.c", {{3651 + 500, "x"}})}));
    EXPECT_FALSE(in_scope(rl.wtype, rl, {added("other.c", {{3672, "x"}})}));
}

TEST(Scope, ProcedureSpanReplacesFallbackWindow) {
    std::string src = "int g(void) {\n"
                      "  return 0;\n"
                      "}\n"
                      "\n"
                      "int f(int *p) {\n"
                      "  int r = 0;\n"
                      "  r = *p;\n"
                      "  return r;\n"
                      "}\n";
    auto w = at_line(WarningType::NullDereference, 7);
    auto window = scope_window_for(w, src);
    ASSERT_TRUE(window.procedure_span);
    EXPECT_EQ(window.procedure_span->first, 5);
    EXPECT_EQ(window.procedure_span->last, 9);
    EXPECT_TRUE(in_scope(w.wtype, w, {added("m.c", {{6, "x"}})}, window));
    EXPECT_FALSE(in_scope(w.wtype, w, {added("m.c", {{2, "x"}})}, window));
    EXPECT_TRUE(in_scope(w.wtype, w, {added("m.c", {{2, "x"}})}));
}

TEST(Aggregate, Examples) {
    auto vtb = aggregate(3, 2);
    EXPECT_EQ(vtb.aggregate, AggregateLabel::VTB);
    EXPECT_TRUE(vtb.awhb);
    auto ltb = aggregate(1, 1);
    EXPECT_EQ(ltb.aggregate, AggregateLabel::LTB);
    EXPECT_TRUE(ltb.awhb);
    auto utb = aggregate(0, 1);
    EXPECT_EQ(utb.aggregate, AggregateLabel::UTB);
    EXPECT_FALSE(utb.awhb);
}

TEST(Aggregate, AllTwelvePairs) {
    int count = 0;
    for (int cm = 0; cm <= 3; ++cm) {
        for (int cc = 0; cc <= 2; ++cc) {
            auto l = aggregate(cm, cc);
            EXPECT_EQ(l.cm, cm);
            EXPECT_EQ(l.cc, cc);
            EXPECT_EQ(l.aggregate, expected_class(cm, cc)) << cm << "," << cc;
            EXPECT_EQ(l.awhb, l.aggregate != AggregateLabel::UTB);
            ++count;
        }
    }
    EXPECT_EQ(count, 12);
}

TEST(Aggregate, Monotone) {
    for (int cm = 0; cm <= 3; ++cm) {
        for (int cc = 0; cc <= 2; ++cc) {
            auto base = rank_of(aggregate(cm, cc).aggregate);
            if (cm < 3) EXPECT_GE(rank_of(aggregate(cm + 1, cc).aggregate), base);
            if (cc < 2) EXPECT_GE(rank_of(aggregate(cm, cc + 1).aggregate), base);
        }
    }
}

TEST(Aggregate, RejectsOutOfRange) {
    EXPECT_THROW(aggregate(4, 0), std::invalid_argument);
    EXPECT_THROW(aggregate(-1, 0), std::invalid_argument);
    EXPECT_THROW(aggregate(0, 3), std::invalid_argument);
    EXPECT_THROW(aggregate(0, -1), std::invalid_argument);
}

TEST(LabelWarning, RefactorIsUnlikely) {
    auto ex = wt_test::refactor_example();
    auto l = label_warning(ex.warning, ex.message, parse_unified_diff(ex.diff));
    EXPECT_EQ(l, aggregate(0, 1));
    EXPECT_EQ(l.aggregate, AggregateLabel::UTB);
    EXPECT_FALSE(l.awhb);
}

TEST(LabelWarning, SocketLeakIsVeryLikely) {
    auto ex = wt_test::socket_leak_example();
    auto l = label_warning(ex.warning, ex.message, parse_unified_diff(ex.diff));
    EXPECT_EQ(l, aggregate(3, 2));
    EXPECT_EQ(l.aggregate, AggregateLabel::VTB);
    EXPECT_TRUE(l.awhb);
}

TEST(Diff, RefactorHunkLineNumbers) {
    auto hunks = parse_unified_diff(wt_test::refactor_example().diff);
    ASSERT_EQ(hunks.size(), 1u);
    EXPECT_EQ(hunks[0].file, "src/server/ua_nodestore_hashmap.c");
    ASSERT_EQ(hunks[0].removed.size(), 2u);
    EXPECT_EQ(hunks[0].removed[0].first, 373);
    EXPECT_EQ(hunks[0].removed[1].first, 374);
    ASSERT_EQ(hunks[0].added.size(), 2u);
    EXPECT_EQ(hunks[0].added[0].first, 373);
    EXPECT_EQ(hunks[0].added[1].second, "        ns, &node->head.nodeId);");
}

TEST(Diff, SocketLeakHunkLineNumbers) {
    auto hunks = parse_unified_diff(wt_test::socket_leak_example().diff);
    ASSERT_EQ(hunks.size(), 1u);
    EXPECT_TRUE(hunks[0].removed.empty());
    EXPECT_EQ(hunks[0].added, (std::vector<std::pair<int, std::string>>{
                                  {3671, "    if (fd != -1)"}, {3672, "        evutil_closesocket(fd);"}}));
}

TEST(Diff, NewDeletedAndMultipleFiles) {
    std::string text = "diff --git a/new.c b/new.c\n"
                       "new file mode 100644\n"
                       "--- /dev/null\n"
                       "+++ b/new.c\n"
                       "@@ -0,0 +1,2 @@\n"
                       "+int a;\n"
                       "+int b;\n"
                       "diff --git a/old.c b/old.c\n"
                       "deleted file mode 100644\n"
                       "--- a/old.c\n"
                       "+++ /dev/null\n"
                       "@@ -1 +0,0 @@\n"
                       "-int gone;\n"
                       "\\ No newline at end of file\n"
                       "diff --git a/m.c b/m.c\n"
                       "--- a/m.c\n"
                       "+++ b/m.c\n"
                       "@@ -10,2 +10,3 @@ void f(void)\n"
                       " a();\n"
                       "+b();\n"
                       " c();\n"
                       "@@ -40,0 +42 @@\n"
                       "+d();\n";
    auto hunks = parse_unified_diff(text);
    ASSERT_EQ(hunks.size(), 4u);
    EXPECT_EQ(hunks[0].file, "new.c");
    EXPECT_EQ(hunks[0].added, (std::vector<std::pair<int, std::string>>{{1, "int a;"}, {2, "int b;"}}));
    EXPECT_EQ(hunks[1].file, "old.c");
    EXPECT_EQ(hunks[1].removed, (std::vector<std::pair<int, std::string>>{{1, "int gone;"}}));
    EXPECT_EQ(hunks[2].file, "m.c");
    EXPECT_EQ(hunks[2].added, (std::vector<std::pair<int, std::string>>{{11, "b();"}}));
    EXPECT_EQ(hunks[3].added, (std::vector<std::pair<int, std::string>>{{42, "d();"}}));
}

TEST(Diff, GarbageIsIgnored) {
    EXPECT_TRUE(parse_unified_diff("").empty());
    EXPECT_TRUE(parse_unified_diff("hello\n@@ nonsense @@\n+x\n").empty());
}

TEST(Diff, AgreesWithGitOnRandomEdits) {
    wt_test::TempDir tmp;
    Rng rng(66);
    for (int iter = 0; iter < 60; ++iter) {
        std::vector<std::string> before, after;
        auto n = rng.below(40);
        for (std::uint64_t i = 0; i < n; ++i) before.push_back("line_" + std::to_string(rng.below(15)));
        for (const auto& l : before) {
            auto r = rng.below(6);
            if (r == 0) continue;
            if (r == 1) after.push_back("new_" + std::to_string(rng.below(1000)));
            after.push_back(l);
        }
        if (rng.below(2)) after.push_back("tail");
        auto join = [](const std::vector<std::string>& v) {
            std::string s;
            for (const auto& l : v) s += l + "\n";
            return s;
        };
        wt_test::write_text(tmp / "a/f.c", join(before));
        wt_test::write_text(tmp / "b/f.c", join(after));
        auto r = run_process({"git", "-C", tmp.path().string(), "diff", "--no-index", "--no-color", "a/f.c", "b/f.c"});
        auto hunks = parse_unified_diff(r.out);
        for (const auto& h : hunks) {
            int prev = 0;
            for (const auto& [ln, text] : h.removed) {
                ASSERT_GE(ln, 1);
                ASSERT_LE(static_cast<std::size_t>(ln), before.size());
                EXPECT_EQ(before[ln - 1], text);
                EXPECT_GT(ln, prev);
                prev = ln;
            }
            prev = 0;
            for (const auto& [ln, text] : h.added) {
                ASSERT_GE(ln, 1);
                ASSERT_LE(static_cast<std::size_t>(ln), after.size());
                EXPECT_EQ(after[ln - 1], text);
                EXPECT_GT(ln, prev);
                prev = ln;
            }
        }
        // replaying the hunks reproduces the new file
        std::vector<bool> drop(before.size(), false), fresh(after.size(), false);
        for (const auto& h : hunks) {
            for (const auto& [ln, t] : h.removed) drop[ln - 1] = true;
            for (const auto& [ln, t] : h.added) fresh[ln - 1] = true;
        }
        std::vector<std::string> kept_old, kept_new;
        for (std::size_t i = 0; i < before.size(); ++i)
            if (!drop[i]) kept_old.push_back(before[i]);
        for (std::size_t i = 0; i < after.size(); ++i)
            if (!fresh[i]) kept_new.push_back(after[i]);
        EXPECT_EQ(kept_old, kept_new);
    }
}
