#include "planchette/alphabet.hpp"

#include <algorithm>

namespace planchette {

Alphabet Alphabet::standard()
{
    std::vector<std::string> names;
    for (char c = 'a'; c <= 'z'; ++c) names.emplace_back(1, c);
    names.emplace_back(kEosName);
    names.emplace_back(kBosName);
    return Alphabet(std::move(names));
}

Alphabet::Alphabet(std::vector<std::string> names)
    : names_(std::move(names)), by_char_(256, -1)
{
    for (std::size_t i = 0; i < names_.size(); ++i) {
        const std::string& n = names_[i];
        const auto s = static_cast<Symbol>(i);
        if (n == kBosName) {
            if (bos_ >= 0) throw ConfigError("alphabet: duplicate BOS");
            bos_ = s;
        } else if (n == kEosName) {
            if (eos_ >= 0) throw ConfigError("alphabet: duplicate EOS");
            eos_ = s;
        } else if (n.size() == 1 && n[0] != '\t' && n[0] != '\n' && n[0] != ' ') {
            auto& slot = by_char_[static_cast<unsigned char>(n[0])];
            if (slot >= 0) throw ConfigError("alphabet: duplicate symbol '" + n + "'");
            slot = s;
        } else {
            throw ConfigError("alphabet: invalid symbol name '" + n + "'");
        }
    }
    if (bos_ < 0 || eos_ < 0) throw ConfigError("alphabet: BOS and EOS are both required");
}

std::optional<Symbol> Alphabet::find(std::string_view name) const
{
    if (name == kBosName) return bos_;
    if (name == kEosName) return eos_;
    if (name.size() == 1) {
        const Symbol s = by_char_[static_cast<unsigned char>(name[0])];
        if (s >= 0) return s;
    }
    return std::nullopt;
}

std::vector<Symbol> Alphabet::encode(std::string_view word) const
{
    std::vector<Symbol> out;
    out.reserve(word.size());
    for (char c : word) {
        const Symbol s = by_char_[static_cast<unsigned char>(c)];
        if (s < 0)
            throw ConfigError("word '" + std::string(word) + "' contains unknown character '" +
                              std::string(1, c) + "'");
        out.push_back(s);
    }
    return out;
}

std::string Alphabet::decode(std::span<const Symbol> symbols) const
{
    std::string out;
    out.reserve(symbols.size());
    for (Symbol s : symbols) {
        if (s == bos_ || s == eos_) throw std::invalid_argument("decode: marker symbol in word");
        out += name(s);
    }
    return out;
}

}  // namespace planchette
