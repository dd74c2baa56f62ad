"""Cognitive-complexity fixture functions.

Expected scores live in expected.json; each was derived by hand from the
increment rules (structures add 1 + nesting, elif/else add a flat 1, boolean
operator runs add 1 plus 1 per alternation, direct recursion adds 1).
"""


def straight_line(value):
    total = value + 1
    return total


def worked_example(aaa, bbb, ccc, ddd, rrr):
    if aaa:
        for idx in rrr:
            if bbb:
                pass
    elif ccc and ddd:
        pass
    else:
        pass


def bool_chain(aaa, bbb, ccc):
    return aaa and bbb and ccc


def bool_alternation(aaa, bbb, ccc, ddd):
    return aaa and bbb or ccc and ddd


def bool_parens(aaa, bbb, ccc):
    return aaa and (bbb and ccc)


def bool_in_call(aaa, bbb, ccc):
    return aaa and max(bbb or ccc, 0)


def branch_else(flag):
    if flag:
        return 1
    else:
        return 2


def elif_chain(code):
    if code == 1:
        return "one"
    elif code == 2:
        return "two"
    elif code == 3:
        return "three"
    else:
        return "other"


def nested_loops(rows):
    total = 0
    for row in rows:
        for cell in row:
            while cell:
                cell -= 1
    return total


def guarded(path):
    try:
        handle = open(path)
    except OSError:
        return None
    except ValueError:
        return None
    return handle


def guarded_nested(path):
    try:
        return open(path)
    except OSError as err:
        if err.errno == 2:
            return None
        raise


def ternary_pick(flag):
    return 1 if flag else 2


def nested_ternary(aaa, bbb):
    return 1 if aaa else (2 if bbb else 3)


def countdown(num):
    if num <= 0:
        return 0
    return countdown(num - 1)


def fib_like(num):
    if num < 2:
        return num
    return fib_like(num - 1) + fib_like(num - 2)


def outer_helper(items):
    def helper(val):
        if val:
            return 1
        return 0

    return [helper(item) for item in items]


def with_lambda(items, flag):
    keyfn = lambda val: val if flag else -val
    return sorted(items, key=keyfn)


def while_else_loop(num):
    while num > 0:
        num -= 1
    else:
        num = -1
    return num


def search_else(items, target):
    found = None
    for item in items:
        if item == target:
            found = item
            break
    else:
        found = -1
    return found


def deep_nest(aaa, bbb, ccc, ddd):
    if aaa:
        if bbb:
            if ccc:
                if ddd:
                    return 1
    return 0


def dispatch_many(code, strict, fallback):
    if code == 1:
        if strict:
            return "one-strict"
        return "one"
    elif code == 2:
        if strict:
            return "two-strict"
        return "two"
    elif code == 3:
        for chunk in fallback:
            if chunk == "x":
                return "three-x"
        return "three"
    elif code == 4 and strict:
        return "four"
    else:
        if fallback or strict:
            return "fallback"
        return "none"


def sixteen_paths(aaa, bbb, ccc, ddd, eee):
    if aaa:
        if bbb:
            if ccc:
                return 1
    if ddd:
        if eee:
            if aaa and bbb:
                return 2
    if aaa or eee:
        return 3
    if bbb:
        return 4
    return 0


def fifteen_paths(aaa, bbb, ccc, ddd):
    if aaa:
        if bbb:
            if ccc:
                return 1
    if ddd:
        if aaa:
            return 2
    if bbb:
        return 3
    if ccc:
        return 4
    if ddd and aaa:
        return 5
    if bbb or ccc:
        return 6
    return 0


def try_else_path(path):
    try:
        handle = open(path)
    except OSError:
        return None
    else:
        return handle


def with_ctx(path):
    with open(path) as handle:
        for line in handle:
            if line:
                return line
    return None


def else_nested_if(aaa, bbb):
    if aaa:
        return 1
    else:
        if bbb:
            return 2
    return 0


def elif_nested_if(aaa, bbb, ccc):
    if aaa:
        return 1
    elif bbb:
        if ccc:
            return 2
    return 0


def negation(aaa, bbb):
    if not aaa:
        return 1
    return not bbb


def negated_chain(aaa, bbb, ccc):
    return not (aaa or bbb) and not ccc


def comp_filter(items, flag):
    return [item for item in items if item or flag]


def long_condition(aaa, bbb, ccc, ddd, eee):
    if aaa and bbb and ccc or ddd and eee:
        return 1
    return 0


async def async_gather(urls, client):
    results = []
    for url in urls:
        if url:
            results.append(await client.get(url))
    return results


def nested_elif_deep(aaa, bbb, ccc):
    if aaa:
        if bbb:
            return 1
        elif ccc:
            return 2
        else:
            return 3
    return 0
