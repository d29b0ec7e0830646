// wired after the book exists
