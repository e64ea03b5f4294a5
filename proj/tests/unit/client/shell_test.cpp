#include <gtest/gtest.h>

#include <fstream>
#include <random>
#include <sstream>

#include "mikfs/client/ownership_cache.hpp"
#include "mikfs/client/shell.hpp"
#include "mikfs/core/file_io.hpp"
#include "mikfs/importexport/service.hpp"
#include "test_server.hpp"

using namespace mikfs;
using client::OwnershipCache;
using client::Shell;
using core::StatusCode;
namespace mt = mikfs::testing;

namespace {

core::Ownership handle(char host, char user)
{
    return {*core::GroupOwner::from_bytes(std::string(16, host)), *core::GroupOwner::from_bytes(std::string(16, user))};
}

std::string slurp(const std::filesystem::path& path) { return *core::read_file(path); }

}  // namespace

TEST(SplitWords, QuotesAndEscapes)
{
    using V = std::vector<std::string>;
    EXPECT_EQ(*client::split_words("put a b"), (V{"put", "a", "b"}));
    EXPECT_EQ(*client::split_words("  put   'my file.txt' \"/x y/z\"  "), (V{"put", "my file.txt", "/x y/z"}));
    EXPECT_EQ(*client::split_words(R"(a\ b "c\"d" 'e\f')"), (V{"a b", "c\"d", "e\\f"}));
    EXPECT_EQ(*client::split_words("x ''"), (V{"x", ""}));
    EXPECT_TRUE(client::split_words("")->empty());
    EXPECT_EQ(client::split_words("'open").code(), StatusCode::invalid_argument);
    EXPECT_EQ(client::split_words("a\\").code(), StatusCode::invalid_argument);
}

TEST(SplitScript, SemicolonsOutsideQuotes)
{
    using V = std::vector<std::string>;
    EXPECT_EQ(client::split_script("ls; pwd ;;\n cd /a"), (V{"ls", " pwd ", " cd /a"}));
    EXPECT_EQ(client::split_script("put 'a;b' \"c;d\"; ls"), (V{"put 'a;b' \"c;d\"", " ls"}));
    EXPECT_EQ(client::split_script(R"(attr set p n a\;b)"), (V{R"(attr set p n a\;b)"}));
}

TEST(ParseOctalMask, ThirteenBits)
{
    using P = core::PermissionsMask;
    // Oracle assembled from the named bits, not from octal arithmetic.
    EXPECT_EQ(client::parse_octal_mask("17540")->bits(),
              P::kSticky | P::kOwnerRead | P::kOwnerWrite | P::kOwnerExecute | P::kUserGroupRead |
                  P::kUserGroupExecute | P::kHostGroupRead);
    EXPECT_EQ(client::parse_octal_mask("17777")->bits(), P::kAllBits);
    EXPECT_EQ(client::parse_octal_mask("0")->bits(), 0u);
    // Octal digits group from the low end: other, host group, user group,
    // owner, then sticky on its own, so "1754" is not the sticky bit.
    EXPECT_EQ(client::parse_octal_mask("1754")->bits(),
              P::kOwnerExecute | P::kUserGroupRead | P::kUserGroupWrite | P::kUserGroupExecute | P::kHostGroupRead |
                  P::kHostGroupExecute | P::kOtherRead);
    EXPECT_EQ(client::parse_octal_mask("20000").code(), StatusCode::invalid_argument);
    EXPECT_EQ(client::parse_octal_mask("8").code(), StatusCode::invalid_argument);
    EXPECT_EQ(client::parse_octal_mask("").code(), StatusCode::invalid_argument);
    EXPECT_EQ(client::parse_octal_mask("177777").code(), StatusCode::invalid_argument);
}

class OwnershipCacheTest : public ::testing::Test {
protected:
    void SetUp() override { dir_ = mt::scratch_dir("ownership-cache"); }
    void TearDown() override { std::filesystem::remove_all(dir_); }

    std::filesystem::path dir_;
};

TEST_F(OwnershipCacheTest, ExactMatchOnlyAndWildcardMiss)
{
    auto cache = OwnershipCache::open(dir_ / "h.json");
    ASSERT_TRUE(cache.ok());
    ASSERT_TRUE((*cache)->remember("s:1", "/a", handle('h', 'u')).ok());
    EXPECT_EQ((*cache)->resolve("s:1", "/a"), handle('h', 'u'));
    EXPECT_EQ((*cache)->resolve("s:1", "/a/b"), core::Ownership{});
    EXPECT_EQ((*cache)->resolve("s:2", "/a"), core::Ownership{});
    EXPECT_EQ((*cache)->resolve("s:1", "/"), core::Ownership{});
}

TEST_F(OwnershipCacheTest, PersistsHandlesAndUserKeys)
{
    std::string key;
    {
        auto cache = OwnershipCache::open(dir_ / "h.json");
        ASSERT_TRUE((*cache)->remember("s:1", "/a", handle('h', 'u')).ok());
        key = (*cache)->user_key("s:1")->key();
        EXPECT_EQ(key.size(), 16u);
        EXPECT_EQ((*cache)->user_key("s:1")->key(), key);
        EXPECT_NE((*cache)->user_key("s:2")->key(), key);
    }
    auto reopened = OwnershipCache::open(dir_ / "h.json");
    ASSERT_TRUE(reopened.ok());
    EXPECT_EQ((*reopened)->resolve("s:1", "/a"), handle('h', 'u'));
    EXPECT_EQ((*reopened)->user_key("s:1")->key(), key);

    std::ofstream(dir_ / "bad.json") << "{nope";
    EXPECT_EQ(OwnershipCache::open(dir_ / "bad.json").code(), StatusCode::invalid_argument);
}

TEST_F(OwnershipCacheTest, RenameAndForgetFollowSubtrees)
{
    auto cache = OwnershipCache::open({});
    ASSERT_TRUE(cache.ok());
    ASSERT_TRUE((*cache)->remember("s:1", "/d", handle('h', '1')).ok());
    ASSERT_TRUE((*cache)->remember("s:1", "/d/f", handle('h', '2')).ok());
    ASSERT_TRUE((*cache)->remember("s:1", "/dx", handle('h', '3')).ok());
    ASSERT_TRUE((*cache)->rename("s:1", "/d", "/e/g").ok());
    EXPECT_EQ((*cache)->resolve("s:1", "/e/g"), handle('h', '1'));
    EXPECT_EQ((*cache)->resolve("s:1", "/e/g/f"), handle('h', '2'));
    EXPECT_EQ((*cache)->resolve("s:1", "/d/f"), core::Ownership{});
    EXPECT_EQ((*cache)->resolve("s:1", "/dx"), handle('h', '3'));
    ASSERT_TRUE((*cache)->forget("s:1", "/e", true).ok());
    EXPECT_EQ((*cache)->resolve("s:1", "/e/g/f"), core::Ownership{});
    EXPECT_EQ((*cache)->resolve("s:1", "/dx"), handle('h', '3'));
}

TEST_F(OwnershipCacheTest, UnreachableServiceFallsBackWithOneWarning)
{
    const auto pki = mt::make_test_pki(dir_ / "pki");
    // Nothing listens on this port: bind a server, note the port, stop it.
    std::uint16_t port = 0;
    {
        importexport::ImportExportConfig config;
        config.port = 0;
        config.tls = {pki.server_cert, pki.server_key, {}};
        auto server = importexport::ImportExportServer::create(config);
        ASSERT_TRUE((*server)->start().ok());
        port = (*server)->port();
    }
    auto service = importexport::ImportExportClient::connect("127.0.0.1", port, {pki.ca_cert, {}, {}, {}});
    std::ostringstream warnings;
    auto cache = OwnershipCache::open(dir_ / "h.json", std::move(*service), &warnings);
    ASSERT_TRUE(cache.ok());
    ASSERT_TRUE((*cache)->remember("s:1", "/a", handle('h', 'u')).ok());
    EXPECT_EQ((*cache)->resolve("s:1", "/a"), handle('h', 'u'));
    EXPECT_EQ((*cache)->resolve("s:1", "/b"), core::Ownership{});
    EXPECT_FALSE((*cache)->service_available());
    const std::string text = warnings.str();
    EXPECT_NE(text.find("unavailable"), std::string::npos);
    EXPECT_EQ(text.find("unavailable"), text.rfind("unavailable"));
}

TEST_F(OwnershipCacheTest, WritesThroughToTheService)
{
    const auto pki = mt::make_test_pki(dir_ / "pki");
    importexport::ImportExportConfig config;
    config.port = 0;
    config.tls = {pki.server_cert, pki.server_key, {}};
    auto server = importexport::ImportExportServer::create(config);
    ASSERT_TRUE((*server)->start().ok());
    auto connect = [&] {
        return std::move(*importexport::ImportExportClient::connect("127.0.0.1", (*server)->port(),
                                                                    {pki.ca_cert, {}, {}, {}}));
    };
    auto cache = OwnershipCache::open(dir_ / "h.json", connect());
    ASSERT_TRUE((*cache)->remember("s:1", "/a", handle('h', 'u')).ok());

    // A second client with an empty local file still finds it.
    auto other = OwnershipCache::open(dir_ / "other.json", connect());
    EXPECT_EQ((*other)->resolve("s:1", "/a"), handle('h', 'u'));
    auto direct = connect();
    EXPECT_EQ(direct->get_path("s:1", "/a")->ownership, handle('h', 'u'));
}

class ShellTest : public ::testing::Test {
protected:
    static void SetUpTestSuite() { pki_ = new mt::TestPki(mt::make_test_pki(mt::scratch_dir("shell-pki"))); }
    static void TearDownTestSuite()
    {
        std::filesystem::remove_all(pki_->dir);
        delete pki_;
    }

    void SetUp() override
    {
        dir_ = mt::scratch_dir("shell");
        server_ = mt::start_server(*pki_);
        client::ShellOptions options;
        options.tls.ca_path = pki_->ca_cert;
        options.ask_secret = [](const std::string&) { return std::string(mt::kWatchword); };
        shell_ = std::make_unique<Shell>(std::move(options), std::move(*OwnershipCache::open(dir_ / "h.json")), out_,
                                         err_);
        url_ = "mikfs://127.0.0.1:" + std::to_string(server_->port()) + "/";
    }
    void TearDown() override
    {
        shell_.reset();
        std::filesystem::remove_all(dir_);
    }

    std::string local(const std::string& name) const { return (dir_ / name).string(); }

    static mt::TestPki* pki_;
    std::filesystem::path dir_;
    std::unique_ptr<server::MikfsServer> server_;
    std::ostringstream out_;
    std::ostringstream err_;
    std::unique_ptr<Shell> shell_;
    std::string url_;
};

mt::TestPki* ShellTest::pki_ = nullptr;

TEST_F(ShellTest, PutGetRoundTripWholeAndChunked)
{
    std::mt19937 rng(7);
    for (std::size_t size : {std::size_t{0}, std::size_t{1}, std::size_t{256 * 1024}, std::size_t{256 * 1024 + 1},
                             std::size_t{700000}}) {
        std::string bytes(size, '\0');
        for (char& c : bytes) {
            c = static_cast<char>(rng());
        }
        std::ofstream(local("in.bin"), std::ios::binary) << bytes;
        const std::string name = "f" + std::to_string(size);
        ASSERT_TRUE(shell_->run_script("open " + url_ + "; login; put '" + local("in.bin") + "' /" + name +
                                       "; get /" + name + " '" + local("out.bin") + "'"))
            << err_.str();
        EXPECT_EQ(slurp(local("out.bin")), bytes) << size;
        const bool chunked = out_.str().find("/" + name + " (" + std::to_string(size) + " bytes, created, chunked)") !=
                             std::string::npos;
        EXPECT_EQ(chunked, size > client::kDefaultChunkThreshold) << size;
    }
}

TEST_F(ShellTest, SessionNarrative)
{
    std::ofstream(local("notes.txt")) << "first notes\n";
    const std::string script = "open " + url_ + "; login; mkdir /docs; put " + local("notes.txt") +
                               " /docs/notes.txt; ls /docs; cd /docs; pwd; get notes.txt " + local("n2.txt") +
                               "; chmod 17540 /docs; stat /docs; attr set notes.txt Colour blue; attr get notes.txt "
                               "colour; find / --name '*.txt'; logout";
    ASSERT_TRUE(shell_->run_script(script)) << err_.str();
    EXPECT_EQ(slurp(local("n2.txt")), "first notes\n");
    const std::string out = out_.str();
    EXPECT_NE(out.find("notes.txt\n"), std::string::npos);
    EXPECT_NE(out.find("/docs\n"), std::string::npos);
    EXPECT_NE(out.find("permissions t rwx r-x r-- --- (17540)"), std::string::npos);
    EXPECT_NE(out.find("blue\n"), std::string::npos);
    EXPECT_NE(out.find("/docs/notes.txt\n"), std::string::npos);

    // The cache holds the handle put allocated, built from the host handle.
    const std::string site = "127.0.0.1:" + std::to_string(server_->port());
    const core::Ownership owner = shell_->cache().resolve(site, "/docs/notes.txt");
    EXPECT_EQ(owner.host_group.key(), std::string(16, '\x07'));
    EXPECT_EQ(owner.user_group.key().size(), 16u);
    EXPECT_EQ(shell_->cache().resolve(site, "/docs").user_group, owner.user_group);

    // GetPermissions over the wire agrees with the named-bit oracle.
    auto direct = mt::connect_client(*pki_, server_->port());
    auto permissions = direct->get_permissions("/docs", {});
    ASSERT_TRUE(permissions.ok());
    using P = core::PermissionsMask;
    EXPECT_EQ(permissions->first.bits(), P::kSticky | P::kOwnerRead | P::kOwnerWrite | P::kOwnerExecute |
                                             P::kUserGroupRead | P::kUserGroupExecute | P::kHostGroupRead);
}

TEST_F(ShellTest, FailuresAreReportedAndTheShellContinues)
{
    EXPECT_FALSE(shell_->run_script("ls; open " + url_ + "; ls /nowhere; bogus; put /no/such/local /x; pwd"));
    const std::string err = err_.str();
    EXPECT_NE(err.find("ls: NotAuthenticated: not connected"), std::string::npos) << err;
    EXPECT_NE(err.find("ls: NotAuthenticated"), err.rfind("ls: NotAuthenticated") + 1) << err;
    EXPECT_NE(err.find("bogus: InvalidArgument: unknown command"), std::string::npos) << err;
    EXPECT_NE(err.find("put: NotFound: cannot read local file"), std::string::npos) << err;
    EXPECT_NE(out_.str().find("/\n"), std::string::npos);
    EXPECT_TRUE(shell_->run_script("login; ls /; quit; bogus"));
}

TEST_F(ShellTest, RemoveMoveCopyAndZip)
{
    std::ofstream(local("a.txt")) << "alpha";
    const std::string script = "open " + url_ + "; login; mkdir /d; mkdir /d/sub; put " + local("a.txt") +
                               " /d/sub/a.txt; cp /d/sub/a.txt /d/b.txt; mv /d /e; zipget /e " + local("e.zip") +
                               "; zipput " + local("e.zip") + " /f; rm /e/b.txt; rm -r /e; ls /f/sub";
    ASSERT_TRUE(shell_->run_script(script)) << err_.str();
    EXPECT_NE(out_.str().find("a.txt\n"), std::string::npos);
    const std::string site = "127.0.0.1:" + std::to_string(server_->port());
    EXPECT_EQ(shell_->cache().resolve(site, "/e/sub/a.txt"), core::Ownership{});
    EXPECT_NE(shell_->cache().resolve(site, "/f"), core::Ownership{});

    EXPECT_FALSE(shell_->run_script("rm /f"));
    EXPECT_NE(err_.str().find("DirectoryNotEmpty"), std::string::npos) << err_.str();
}

TEST_F(ShellTest, HandlesExportMasksKeys)
{
    std::ofstream(local("a.txt")) << "alpha";
    ASSERT_TRUE(shell_->run_script("open " + url_ + "; login; put " + local("a.txt") + " /a.txt; handles export " +
                                   local("all.json") + "; handles export " + local("masked.json") +
                                   " --mask-user --filter '/a*'"))
        << err_.str();
    const std::string site = "127.0.0.1:" + std::to_string(server_->port());
    const std::string user = shell_->cache().resolve(site, "/a.txt").user_group.key();
    std::string user_hex;
    for (unsigned char c : user) {
        static const char* digits = "0123456789abcdef";
        user_hex += digits[c >> 4];
        user_hex += digits[c & 15];
    }
    EXPECT_NE(slurp(local("all.json")).find(user_hex), std::string::npos);
    EXPECT_EQ(slurp(local("masked.json")).find(user_hex), std::string::npos);
    EXPECT_NE(slurp(local("masked.json")).find("/a.txt"), std::string::npos);
}

TEST_F(ShellTest, WatchPrintsEventsAsTheyArrive)
{
    ASSERT_TRUE(shell_->run_script("open " + url_ + "; login; watch / '*.log'; mkdir /w; sleep 100"));
    std::ofstream(local("x.log")) << "x";
    ASSERT_TRUE(shell_->run_script("put " + local("x.log") + " /w/x.log; sleep 300; watch stop")) << err_.str();
    const std::string out = out_.str();
    EXPECT_NE(out.find("event #1 FileCreated /w/x.log"), std::string::npos) << out;
    EXPECT_EQ(out.find("DirCreated"), std::string::npos) << out;
}
