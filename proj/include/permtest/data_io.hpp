#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "permtest/statistics.hpp"

namespace permtest {

/// entry-tsv: `correct<TAB>length` or `true_positive<TAB>incorrect<TAB>length`
/// per line. token-tsv: whitespace-separated 0/1 flags per line. json: an
/// array of objects using the same field names. Blank lines and lines
/// starting with `#` are skipped in the text formats.
enum class CorpusFormat { entry_tsv, token_tsv, json };

/// Which fields a record carries when written back out.
enum class RecordKind { accuracy, f1 };

std::optional<CorpusFormat> parse_corpus_format(std::string_view name);
std::string_view corpus_format_name(CorpusFormat f);

struct CorpusFile {
    CorpusFormat format = CorpusFormat::entry_tsv;
    std::filesystem::path path;
};

/// Parse one system's entries. `source` names the input in error messages.
std::vector<EntryRecord> parse_entries(std::string_view text, CorpusFormat format, const std::string& source);

std::vector<EntryRecord> load_entries(const CorpusFile& file);

/// Load and align both systems' outputs. Throws ParseError, AlignmentError,
/// EmptyDatasetError or IoError.
PairedDataset load_paired(const CorpusFile& u_file, const CorpusFile& v_file);

/// token-tsv only supports RecordKind::accuracy.
std::string serialize_entries(std::span<const EntryRecord> entries, CorpusFormat format, RecordKind kind);

void save_entries(const std::filesystem::path& path, std::span<const EntryRecord> entries, CorpusFormat format,
                  RecordKind kind);

} // namespace permtest
