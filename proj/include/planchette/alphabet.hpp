// Ordered symbol set shared by boards and language models.
#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace planchette {

/// Raised for malformed inputs: files, configs, vocabularies, layouts.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Index into an Alphabet.
using Symbol = int;

inline constexpr std::string_view kBosName = "BOS";
inline constexpr std::string_view kEosName = "EOS";

/// Symbols are either the literal markers `BOS` / `EOS` or single characters.
/// Exactly one BOS and one EOS are required. BOS is a padding/start marker and
/// is never emitted; every other symbol is emittable.
class Alphabet {
public:
    /// a..z, EOS, BOS
    static Alphabet standard();

    explicit Alphabet(std::vector<std::string> names);

    std::size_t size() const { return names_.size(); }
    std::size_t emittable_count() const { return names_.size() - 1; }
    Symbol bos() const { return bos_; }
    Symbol eos() const { return eos_; }
    bool is_emittable(Symbol s) const { return s != bos_; }

    const std::string& name(Symbol s) const { return names_.at(static_cast<std::size_t>(s)); }
    const std::vector<std::string>& names() const { return names_; }

    std::optional<Symbol> find(std::string_view name) const;

    /// Maps each character of `word` to its symbol. Throws ConfigError naming
    /// the word if a character is not on the board.
    std::vector<Symbol> encode(std::string_view word) const;

    /// Inverse of encode for character symbols; BOS/EOS are rejected.
    std::string decode(std::span<const Symbol> symbols) const;

    bool operator==(const Alphabet&) const = default;

private:
    std::vector<std::string> names_;
    std::vector<Symbol> by_char_;  // 256 entries, -1 when absent
    Symbol bos_ = -1;
    Symbol eos_ = -1;
};

}  // namespace planchette
