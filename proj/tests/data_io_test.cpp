#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "oracles.hpp"
#include "permtest/data_io.hpp"
#include "permtest/errors.hpp"

using namespace permtest;

namespace {

class TempDir {
public:
    TempDir()
    {
        path_ = std::filesystem::temp_directory_path() /
                ("permtest_io_" + std::to_string(std::random_device{}()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() { std::filesystem::remove_all(path_); }

    std::filesystem::path write(const std::string& name, const std::string& text) const
    {
        const auto p = path_ / name;
        std::ofstream(p, std::ios::binary) << text;
        return p;
    }

private:
    std::filesystem::path path_;
};

} // namespace

TEST(EntryTsv, AccuracyRows)
{
    TempDir dir;
    const auto u = dir.write("u.tsv", "3\t5\n4\t4\n");
    const auto v = dir.write("v.tsv", "2\t5\n4\t4\n");
    const auto ds = load_paired({CorpusFormat::entry_tsv, u}, {CorpusFormat::entry_tsv, v});
    ASSERT_EQ(ds.size(), 2U);
    EXPECT_EQ(ds.u[0], (EntryRecord{3, 5, 0, 0}));
    EXPECT_EQ(ds.v[1], (EntryRecord{4, 4, 0, 0}));
}

TEST(EntryTsv, F1Rows)
{
    const auto e = parse_entries("2\t1\t6\n0\t0\t1\n", CorpusFormat::entry_tsv, "mem");
    ASSERT_EQ(e.size(), 2U);
    EXPECT_EQ(e[0], (EntryRecord{0, 6, 2, 1}));
}

TEST(EntryTsv, CommentsBlankLinesAndCrlf)
{
    const auto e = parse_entries("\xEF\xBB\xBF# header\r\n\r\n3\t5\r\n   \n# trailing\n1\t2", CorpusFormat::entry_tsv, "mem");
    ASSERT_EQ(e.size(), 2U);
    EXPECT_EQ(e[0].correct, 3);
    EXPECT_EQ(e[1].length, 2);
}

TEST(EntryTsv, MalformedLineReportsLineNumber)
{
    try {
        parse_entries("3\t5\n# c\nx\t5\n", CorpusFormat::entry_tsv, "u.tsv");
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 3U);
        EXPECT_NE(std::string(e.what()).find("u.tsv:3"), std::string::npos);
    }
    EXPECT_THROW(parse_entries("3 5\n", CorpusFormat::entry_tsv, "m"), ParseError);
    EXPECT_THROW(parse_entries("1\t2\t3\t4\n", CorpusFormat::entry_tsv, "m"), ParseError);
    EXPECT_THROW(parse_entries("-1\t2\n", CorpusFormat::entry_tsv, "m"), ParseError);
}

TEST(EntryTsv, StrictValidation)
{
    try {
        parse_entries("1\t2\n6\t5\n", CorpusFormat::entry_tsv, "m");
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 2U);
    }
    EXPECT_THROW(parse_entries("0\t0\n", CorpusFormat::entry_tsv, "m"), ParseError);
}

TEST(EntryTsv, MixedFieldCountsRejected)
{
    EXPECT_THROW(parse_entries("1\t2\n1\t0\t2\n", CorpusFormat::entry_tsv, "m"), ParseError);
}

TEST(TokenTsv, AggregatesFlags)
{
    // Hand count: 1+0+1+1+0 = 3 correct of 5 tokens.
    const auto e = parse_entries("1 0 1 1 0\n1\n0 0\n", CorpusFormat::token_tsv, "mem");
    ASSERT_EQ(e.size(), 3U);
    EXPECT_EQ(e[0], (EntryRecord{3, 5, 0, 0}));
    EXPECT_EQ(e[1], (EntryRecord{1, 1, 0, 0}));
    EXPECT_EQ(e[2], (EntryRecord{0, 2, 0, 0}));
    EXPECT_THROW(parse_entries("1 2 0\n", CorpusFormat::token_tsv, "m"), ParseError);
}

TEST(Json, BothRecordKinds)
{
    const auto acc = parse_entries(R"([{"correct": 3, "length": 5}, {"correct": 0, "length": 1}])",
                                   CorpusFormat::json, "mem");
    ASSERT_EQ(acc.size(), 2U);
    EXPECT_EQ(acc[0], (EntryRecord{3, 5, 0, 0}));
    const auto f1 = parse_entries(R"([{"true_positive": 2, "incorrect": 1, "length": 4}])", CorpusFormat::json, "mem");
    EXPECT_EQ(f1[0], (EntryRecord{0, 4, 2, 1}));
}

TEST(Json, Errors)
{
    try {
        parse_entries("[\n{\"correct\": 1,\n \"length\": }\n]", CorpusFormat::json, "j");
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 3U);
    }
    EXPECT_THROW(parse_entries(R"({"correct": 1})", CorpusFormat::json, "j"), ParseError);
    EXPECT_THROW(parse_entries(R"([{"correct": 1}])", CorpusFormat::json, "j"), ParseError);
    EXPECT_THROW(parse_entries(R"([{"length": 1}])", CorpusFormat::json, "j"), ParseError);
    EXPECT_THROW(parse_entries(R"([{"correct": 4, "length": 3}])", CorpusFormat::json, "j"), ParseError);
    EXPECT_THROW(parse_entries(R"([{"correct": 1.5, "length": 3}])", CorpusFormat::json, "j"), ParseError);
}

TEST(LoadPaired, CountMismatchIsAlignmentError)
{
    TempDir dir;
    const auto u = dir.write("u.tsv", "1\t2\n1\t2\n1\t2\n");
    const auto v = dir.write("v.tsv", "1\t2\n1\t2\n1\t2\n0\t2\n");
    EXPECT_THROW(load_paired({CorpusFormat::entry_tsv, u}, {CorpusFormat::entry_tsv, v}), AlignmentError);
}

TEST(LoadPaired, LengthMismatchNamesEntry)
{
    TempDir dir;
    const auto u = dir.write("u.tsv", "1\t2\n1\t3\n");
    const auto v = dir.write("v.json", R"([{"correct":1,"length":2},{"correct":1,"length":4}])");
    try {
        load_paired({CorpusFormat::entry_tsv, u}, {CorpusFormat::json, v});
        FAIL() << "expected AlignmentError";
    } catch (const AlignmentError& e) {
        EXPECT_EQ(e.entry_index(), 1U);
    }
}

TEST(LoadPaired, EmptyAndMissingFiles)
{
    TempDir dir;
    const auto u = dir.write("u.tsv", "# nothing\n");
    EXPECT_THROW(load_paired({CorpusFormat::entry_tsv, u}, {CorpusFormat::entry_tsv, u}), EmptyDatasetError);
    EXPECT_THROW(load_entries({CorpusFormat::entry_tsv, "/nonexistent/permtest.tsv"}), IoError);
}

TEST(Formats, Names)
{
    EXPECT_EQ(parse_corpus_format("token-tsv"), CorpusFormat::token_tsv);
    EXPECT_EQ(parse_corpus_format("csv"), std::nullopt);
    EXPECT_EQ(corpus_format_name(CorpusFormat::json), "json");
    EXPECT_THROW(serialize_entries({}, CorpusFormat::token_tsv, RecordKind::f1), InvalidInputError);
}

TEST(RoundTrip, EverySerializationReloadsIdentically)
{
    std::mt19937_64 rng(51);
    TempDir dir;
    for (int trial = 0; trial < 20; ++trial) {
        const auto acc = oracle::random_accuracy_dataset(rng, 50, 12);
        for (auto fmt : {CorpusFormat::entry_tsv, CorpusFormat::token_tsv, CorpusFormat::json}) {
            const auto u = dir.write("u", "");
            const auto v = dir.write("v", "");
            save_entries(u, acc.u, fmt, RecordKind::accuracy);
            save_entries(v, acc.v, fmt, RecordKind::accuracy);
            EXPECT_EQ(load_paired({fmt, u}, {fmt, v}), acc) << corpus_format_name(fmt);
        }
        const auto f1 = oracle::random_f1_dataset(rng, 50, 4);
        for (auto fmt : {CorpusFormat::entry_tsv, CorpusFormat::json}) {
            const auto text_u = serialize_entries(f1.u, fmt, RecordKind::f1);
            const auto text_v = serialize_entries(f1.v, fmt, RecordKind::f1);
            const PairedDataset back{parse_entries(text_u, fmt, "u"), parse_entries(text_v, fmt, "v")};
            EXPECT_EQ(back, f1) << corpus_format_name(fmt);
        }
    }
}
