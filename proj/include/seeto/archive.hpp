#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "seeto/embedder.hpp"
#include "seeto/gp.hpp"
#include "seeto/types.hpp"

namespace seeto {

// One solved task: its observed state, every true evaluation made while
// solving it (decisions normalized to `bounds`), and the surrogate trained on
// that data.
struct TaskRecord {
    TaskId id;
    TaskState state;
    Bounds bounds;
    std::vector<EvaluatedSolution> dataset;
    std::shared_ptr<const GpModel> model;
    std::map<std::string, std::string> metadata;
};

// Insertion-ordered store of solved tasks plus the state embedder used to
// compare them.
struct SourceArchive {
    static constexpr int kFormatVersion = 1;

    int format_version = kFormatVersion;
    std::vector<TaskRecord> records;
    std::optional<Embedder> embedder;

    [[nodiscard]] bool empty() const noexcept { return records.empty(); }
    [[nodiscard]] std::size_t size() const noexcept { return records.size(); }
    [[nodiscard]] const TaskRecord* find(const TaskId& id) const;
    void append(TaskRecord record);
};

// Archive <-> text. The text is JSON with one checksum per record.
[[nodiscard]] std::string archive_to_string(const SourceArchive& archive);
// Throws ParseError, MigrationError or ChecksumError.
[[nodiscard]] SourceArchive archive_from_string(const std::string& text);

void save_archive(const SourceArchive& archive, const std::filesystem::path& path);
[[nodiscard]] SourceArchive load_archive(const std::filesystem::path& path);

}  // namespace seeto
