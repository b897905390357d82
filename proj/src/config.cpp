namespace lmce { namespace { [[maybe_unused]] int placeholder_config = 0; } }
