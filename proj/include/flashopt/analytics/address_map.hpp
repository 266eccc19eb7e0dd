#pragma once

#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <string>

namespace flashopt::analytics {

// "0x" followed by 40 hex digits, any case.
bool is_valid_address(const std::string& address);
// Lowercased address; ParseError when malformed.
std::string normalize_address(const std::string& address);

class AddressMap {
 public:
  // Contract map shipped with the tool (44 addresses).
  static AddressMap bundled();
  // Lines "address,project"; blank lines and '#' comments are skipped.
  static AddressMap parse(std::istream& in, const std::string& origin = "map");
  static AddressMap load(const std::filesystem::path& path);

  void add(const std::string& address, const std::string& project);
  // ParseError for a malformed address; nullopt when unmapped.
  std::optional<std::string> lookup(const std::string& address) const;

  std::size_t size() const { return entries_.size(); }
  const std::map<std::string, std::string>& entries() const { return entries_; }

 private:
  std::map<std::string, std::string> entries_;
};

}  // namespace flashopt::analytics
