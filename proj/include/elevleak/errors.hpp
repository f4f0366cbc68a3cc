#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace elevleak {

// Error taxonomy mirrors the CLI exit codes: validation (1), data (2),
// internal (3). Every library failure is one of these.
class Error : public std::runtime_error {
public:
    enum class Kind { validation, data, internal };

    Error(Kind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& msg) : Error(Kind::validation, msg) {}
};

class DataError : public Error {
public:
    explicit DataError(const std::string& msg) : Error(Kind::data, msg) {}
};

class InternalError : public Error {
public:
    explicit InternalError(const std::string& msg) : Error(Kind::internal, msg) {}
};

// ---- geodata ----

struct MalformedXml : DataError {
    explicit MalformedXml(const std::string& detail) : DataError("malformed xml: " + detail) {}
};

struct MissingElevation : DataError {
    explicit MissingElevation(std::size_t point_index)
        : DataError("track point " + std::to_string(point_index) + " has no elevation"),
          index(point_index) {}
    std::size_t index;
};

struct EmptyTrack : DataError {
    EmptyTrack() : DataError("track contains no points") {}
};

// ---- miner ----

struct DegenerateBoundary : ValidationError {
    DegenerateBoundary() : ValidationError("boundary is degenerate (zero extent on an axis)") {}
};

struct TruncatedChunk : DataError {
    TruncatedChunk() : DataError("polyline ends inside an unterminated chunk") {}
};

struct InvalidCharacter : DataError {
    explicit InvalidCharacter(char c)
        : DataError(std::string("invalid polyline character '") + c + "'"), character(c) {}
    char character;
};

struct ClientError : DataError {
    ClientError(std::size_t cell, const std::string& detail)
        : DataError("service client failed for cell " + std::to_string(cell) + ": " + detail),
          cell_index(cell) {}
    std::size_t cell_index;
};

// ---- textrep ----

struct NonFiniteElevation : DataError {
    NonFiniteElevation() : DataError("elevation value is not finite") {}
};

struct InvalidAlphabet : ValidationError {
    InvalidAlphabet() : ValidationError("alphabet must contain at least 2 distinct symbols") {}
};

struct AlphabetTooSmall : ValidationError {
    AlphabetTooSmall() : ValidationError("alphabet cannot address all unique values at this word size") {}
};

struct UnknownValue : DataError {
    explicit UnknownValue(long long discrete_value)
        : DataError("value " + std::to_string(discrete_value) +
                    " (milli-units) is not in the codebook"),
          value(discrete_value) {}
    long long value;
};

struct MisalignedCorpus : DataError {
    MisalignedCorpus() : DataError("corpus line length is not a multiple of the word size") {}
};

// ---- models ----

struct SingleClassDataset : ValidationError {
    SingleClassDataset() : ValidationError("dataset contains fewer than 2 classes") {}
};

struct DivergedLoss : DataError {
    explicit DivergedLoss(std::size_t epoch)
        : DataError("training loss became non-finite at epoch " + std::to_string(epoch)),
          epoch(epoch) {}
    std::size_t epoch;
};

struct ShapeMismatch : ValidationError {
    explicit ShapeMismatch(const std::string& detail) : ValidationError("shape mismatch: " + detail) {}
};

struct EmptyRound : ValidationError {
    explicit EmptyRound(std::size_t round_index)
        : ValidationError("round " + std::to_string(round_index) + " has no classes left"),
          round_index(round_index) {}
    std::size_t round_index;
};

// ---- eval ----

struct TooFewSamples : ValidationError {
    TooFewSamples(std::size_t have, std::size_t need)
        : ValidationError("need at least " + std::to_string(need) + " samples, have " +
                          std::to_string(have)) {}
};

struct ClassTooSmall : ValidationError {
    ClassTooSmall(const std::string& label, std::size_t have, std::size_t need)
        : ValidationError("class '" + label + "' has " + std::to_string(have) +
                          " samples, need " + std::to_string(need)),
          label(label) {}
    std::string label;
};

struct DegenerateSplit : ValidationError {
    DegenerateSplit() : ValidationError("split produced an empty train or test side") {}
};

struct EmptyClass : ValidationError {
    explicit EmptyClass(const std::string& label)
        : ValidationError("class '" + label + "' is empty"), label(label) {}
    std::string label;
};

struct LengthMismatch : ValidationError {
    LengthMismatch(std::size_t a, std::size_t b)
        : ValidationError("predictions (" + std::to_string(a) + ") and labels (" +
                          std::to_string(b) + ") differ in length") {}
};

struct MissingLabelLevel : ValidationError {
    explicit MissingLabelLevel(const std::string& level)
        : ValidationError("dataset lacks the '" + level + "' label level"), level(level) {}
    std::string level;
};

// ---- cli ----

struct ConfigError : ValidationError {
    ConfigError(const std::string& field, const std::string& detail)
        : ValidationError("config field '" + field + "': " + detail), field(field) {}
    std::string field;
};

struct UnknownSample : DataError {
    explicit UnknownSample(const std::string& id)
        : DataError("no sample with id '" + id + "'"), id(id) {}
    std::string id;
};

} // namespace elevleak
