"""Plot documents and run report files."""
