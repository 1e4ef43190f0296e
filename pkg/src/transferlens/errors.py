"""Shared error types.

``DataError`` covers everything wrong with inputs at run time: malformed
corpora, inconsistent LSOs where consistency is required, unusable numeric
preconditions.  ``UsageError`` covers bad invocations.  The command-line
layer maps them to distinct exit codes.
"""


class DataError(Exception):
    pass


class UsageError(Exception):
    pass
