#include "permtest/data_io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "permtest/errors.hpp"

namespace permtest {

namespace {

std::string_view trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::int64_t parse_count(std::string_view field, const std::string& source, std::size_t line)
{
    std::int64_t value = 0;
    const auto* end = field.data() + field.size();
    const auto [ptr, ec] = std::from_chars(field.data(), end, value);
    if (ec != std::errc() || ptr != end || field.empty()) {
        throw ParseError(source, line, "expected a non-negative integer, got '" + std::string(field) + "'");
    }
    if (value < 0) {
        throw ParseError(source, line, "negative count " + std::string(field));
    }
    return value;
}

void check_record(const EntryRecord& r, const std::string& source, std::size_t line)
{
    try {
        validate_record(r, "record");
    } catch (const InvalidInputError& e) {
        throw ParseError(source, line, e.what());
    }
}

template <typename Fn>
void for_each_content_line(std::string_view text, Fn&& fn)
{
    if (text.starts_with("\xEF\xBB\xBF")) {
        text.remove_prefix(3);
    }
    std::size_t line_no = 0;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.remove_suffix(1);
        }
        const auto content = trim(line);
        if (content.empty() || content.front() == '#') {
            continue;
        }
        fn(line, line_no);
    }
}

std::vector<EntryRecord> parse_entry_tsv(std::string_view text, const std::string& source)
{
    std::vector<EntryRecord> out;
    std::size_t expected_fields = 0;
    for_each_content_line(text, [&](std::string_view line, std::size_t line_no) {
        std::vector<std::string_view> fields;
        std::size_t pos = 0;
        while (true) {
            const auto tab = line.find('\t', pos);
            fields.push_back(trim(line.substr(pos, tab == std::string_view::npos ? line.npos : tab - pos)));
            if (tab == std::string_view::npos) {
                break;
            }
            pos = tab + 1;
        }
        if (fields.size() != 2 && fields.size() != 3) {
            throw ParseError(source, line_no,
                             "expected 2 (correct, length) or 3 (true_positive, incorrect, length) "
                             "tab-separated fields, got " +
                                 std::to_string(fields.size()));
        }
        if (expected_fields == 0) {
            expected_fields = fields.size();
        } else if (fields.size() != expected_fields) {
            throw ParseError(source, line_no,
                             "field count " + std::to_string(fields.size()) + " differs from earlier lines (" +
                                 std::to_string(expected_fields) + ")");
        }
        EntryRecord r;
        if (fields.size() == 2) {
            r.correct = parse_count(fields[0], source, line_no);
            r.length = parse_count(fields[1], source, line_no);
        } else {
            r.true_positive = parse_count(fields[0], source, line_no);
            r.incorrect = parse_count(fields[1], source, line_no);
            r.length = parse_count(fields[2], source, line_no);
        }
        check_record(r, source, line_no);
        out.push_back(r);
    });
    return out;
}

std::vector<EntryRecord> parse_token_tsv(std::string_view text, const std::string& source)
{
    std::vector<EntryRecord> out;
    for_each_content_line(text, [&](std::string_view line, std::size_t line_no) {
        EntryRecord r;
        r.length = 0;
        std::size_t pos = 0;
        while (pos < line.size()) {
            const auto start = line.find_first_not_of(" \t", pos);
            if (start == std::string_view::npos) {
                break;
            }
            auto stop = line.find_first_of(" \t", start);
            if (stop == std::string_view::npos) {
                stop = line.size();
            }
            const auto tok = line.substr(start, stop - start);
            if (tok == "1") {
                ++r.correct;
            } else if (tok != "0") {
                throw ParseError(source, line_no, "token flag must be 0 or 1, got '" + std::string(tok) + "'");
            }
            ++r.length;
            pos = stop;
        }
        out.push_back(r);
    });
    return out;
}

std::size_t line_of_offset(std::string_view text, std::size_t byte)
{
    byte = std::min(byte, text.size());
    return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
}

std::vector<EntryRecord> parse_json(std::string_view text, const std::string& source)
{
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(source, line_of_offset(text, e.byte), e.what());
    }
    if (!doc.is_array()) {
        throw ParseError(source, 1, "top-level JSON value must be an array of entry objects");
    }
    auto field = [&](const nlohmann::json& obj, const char* name, std::size_t idx) -> std::optional<std::int64_t> {
        const auto it = obj.find(name);
        if (it == obj.end()) {
            return std::nullopt;
        }
        if (!it->is_number_integer() || it->get<std::int64_t>() < 0) {
            throw ParseError(source, 0, "element " + std::to_string(idx) + ": field '" + name +
                                            "' must be a non-negative integer");
        }
        return it->get<std::int64_t>();
    };
    std::vector<EntryRecord> out;
    out.reserve(doc.size());
    for (std::size_t i = 0; i < doc.size(); ++i) {
        const auto& obj = doc[i];
        if (!obj.is_object()) {
            throw ParseError(source, 0, "element " + std::to_string(i) + " is not an object");
        }
        EntryRecord r;
        const auto length = field(obj, "length", i);
        if (!length) {
            throw ParseError(source, 0, "element " + std::to_string(i) + " has no 'length'");
        }
        r.length = *length;
        const auto correct = field(obj, "correct", i);
        const auto tp = field(obj, "true_positive", i);
        const auto incorrect = field(obj, "incorrect", i);
        if (!correct && !(tp && incorrect)) {
            throw ParseError(source, 0,
                             "element " + std::to_string(i) + " needs 'correct' or both 'true_positive' and 'incorrect'");
        }
        r.correct = correct.value_or(0);
        r.true_positive = tp.value_or(0);
        r.incorrect = incorrect.value_or(0);
        try {
            validate_record(r, "element " + std::to_string(i));
        } catch (const InvalidInputError& e) {
            throw ParseError(source, 0, e.what());
        }
        out.push_back(r);
    }
    return out;
}

} // namespace

std::optional<CorpusFormat> parse_corpus_format(std::string_view name)
{
    if (name == "entry-tsv") {
        return CorpusFormat::entry_tsv;
    }
    if (name == "token-tsv") {
        return CorpusFormat::token_tsv;
    }
    if (name == "json") {
        return CorpusFormat::json;
    }
    return std::nullopt;
}

std::string_view corpus_format_name(CorpusFormat f)
{
    switch (f) {
    case CorpusFormat::entry_tsv:
        return "entry-tsv";
    case CorpusFormat::token_tsv:
        return "token-tsv";
    case CorpusFormat::json:
        return "json";
    }
    return "unknown";
}

std::vector<EntryRecord> parse_entries(std::string_view text, CorpusFormat format, const std::string& source)
{
    switch (format) {
    case CorpusFormat::entry_tsv:
        return parse_entry_tsv(text, source);
    case CorpusFormat::token_tsv:
        return parse_token_tsv(text, source);
    case CorpusFormat::json:
        return parse_json(text, source);
    }
    throw InvalidInputError("unknown corpus format");
}

std::vector<EntryRecord> load_entries(const CorpusFile& file)
{
    std::ifstream in(file.path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + file.path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) {
        throw IoError("failed reading " + file.path.string());
    }
    return parse_entries(buf.str(), file.format, file.path.string());
}

PairedDataset load_paired(const CorpusFile& u_file, const CorpusFile& v_file)
{
    PairedDataset ds{load_entries(u_file), load_entries(v_file)};
    validate_dataset(ds);
    return ds;
}

std::string serialize_entries(std::span<const EntryRecord> entries, CorpusFormat format, RecordKind kind)
{
    std::string out;
    switch (format) {
    case CorpusFormat::entry_tsv:
        for (const auto& r : entries) {
            if (kind == RecordKind::accuracy) {
                out += std::to_string(r.correct) + '\t' + std::to_string(r.length) + '\n';
            } else {
                out += std::to_string(r.true_positive) + '\t' + std::to_string(r.incorrect) + '\t' +
                       std::to_string(r.length) + '\n';
            }
        }
        return out;
    case CorpusFormat::token_tsv:
        if (kind != RecordKind::accuracy) {
            throw InvalidInputError("token-tsv can only hold accuracy records");
        }
        for (const auto& r : entries) {
            for (std::int64_t t = 0; t < r.length; ++t) {
                if (t > 0) {
                    out += ' ';
                }
                out += t < r.correct ? '1' : '0';
            }
            out += '\n';
        }
        return out;
    case CorpusFormat::json: {
        auto doc = nlohmann::json::array();
        for (const auto& r : entries) {
            if (kind == RecordKind::accuracy) {
                doc.push_back({{"correct", r.correct}, {"length", r.length}});
            } else {
                doc.push_back({{"true_positive", r.true_positive}, {"incorrect", r.incorrect}, {"length", r.length}});
            }
        }
        return doc.dump() + '\n';
    }
    }
    throw InvalidInputError("unknown corpus format");
}

void save_entries(const std::filesystem::path& path, std::span<const EntryRecord> entries, CorpusFormat format,
                  RecordKind kind)
{
    const std::string text = serialize_entries(entries, format, kind);
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot open " + path.string() + " for writing");
    }
    out << text;
    if (!out) {
        throw IoError("failed writing " + path.string());
    }
}

} // namespace permtest
