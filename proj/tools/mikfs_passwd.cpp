// mikfs-passwd: writes users-file lines for the user-password scheme.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "mikfs/auth/users.hpp"
#include "mikfs/core/file_io.hpp"
#include "secret_prompt.hpp"

using namespace mikfs;

int main(int argc, char** argv)
{
    CLI::App app{"mikfs-passwd: add or replace a user in a mikfs users file"};
    std::string username;
    std::string file;
    app.add_option("username", username, "User name")->required();
    app.add_option("--file", file, "Users file to update; prints the line when absent")->envname("MIKFS_USERS");
    CLI11_PARSE(app, argc, argv);

    const std::string password = tools::read_secret("password for " + username + ": ");
    if (password.empty()) {
        std::cerr << "mikfs-passwd: empty password\n";
        return 2;
    }
    auto line = auth::make_user_line(username, password);
    if (!line.ok()) {
        std::cerr << "mikfs-passwd: " << line.status().to_string() << '\n';
        return 2;
    }
    if (file.empty()) {
        std::cout << *line << '\n';
        return 0;
    }

    // Keep every other line, replace this user's.
    std::string kept;
    if (auto existing = core::read_file(file); existing.ok()) {
        std::istringstream in(*existing);
        std::string current;
        while (std::getline(in, current)) {
            if (current.rfind(username + ":", 0) != 0) {
                kept += current + "\n";
            }
        }
    }
    kept += *line + "\n";
    if (auto status = core::write_file_atomic(file, kept); !status.ok()) {
        std::cerr << "mikfs-passwd: " << status.to_string() << '\n';
        return 1;
    }
    return 0;
}
