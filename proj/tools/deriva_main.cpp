// Placeholder while the library comes up; the real CLI lands with the cli
// module.
int main() { return 0; }
