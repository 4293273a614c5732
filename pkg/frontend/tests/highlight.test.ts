import { describe, expect, it } from 'vitest';

import { escHtml, gutter, lineStarts, markSpans, spanToRange } from '../src/highlight';

const TEXT = 'func f(n) {\n  print(8*n);\n}\n';

describe('escHtml', () => {
  it('escapes markup characters', () => {
    expect(escHtml('a < b && c > "d"')).toBe('a &lt; b &amp;&amp; c &gt; &quot;d&quot;');
  });

  it('passes plain text through', () => {
    expect(escHtml('print(8*n);')).toBe('print(8*n);');
  });
});

describe('lineStarts', () => {
  it('records the offset of every line, 1-based', () => {
    expect(lineStarts(TEXT)).toEqual([0, 0, 12, 26, 28]);
  });
});

describe('spanToRange', () => {
  it('maps a single-line span to offsets', () => {
    // "print" on line 2 starts at column 3
    const [a, b] = spanToRange(TEXT, { line: 2, column: 3, end_line: 2, end_column: 8 });
    expect(TEXT.slice(a, b)).toBe('print');
  });

  it('maps a multi-line span', () => {
    const [a, b] = spanToRange(TEXT, { line: 1, column: 1, end_line: 3, end_column: 2 });
    expect(TEXT.slice(a, b)).toBe(TEXT.slice(0, 27));
  });

  it('clamps past the end of the text', () => {
    const [a, b] = spanToRange(TEXT, { line: 9, column: 1, end_line: 9, end_column: 5 });
    expect(a).toBe(TEXT.length);
    expect(b).toBe(TEXT.length);
  });
});

describe('markSpans', () => {
  it('wraps the covered region in a mark tag', () => {
    const html = markSpans(TEXT, [
      { span: { line: 2, column: 3, end_line: 2, end_column: 8 }, cls: 'mk-mismatch' },
    ]);
    expect(html).toContain('<mark class="mk-mismatch">print</mark>');
    expect(html.startsWith('func f(n)')).toBe(true);
  });

  it('escapes text inside and outside marks', () => {
    const source = 'if (a < b) { x = "<&>"; }';
    const html = markSpans(source, [
      { span: { line: 1, column: 5, end_line: 1, end_column: 10 }, cls: 'mk-support' },
    ]);
    expect(html).toContain('<mark class="mk-support">a &lt; b</mark>');
    expect(html).toContain('&quot;&lt;&amp;&gt;&quot;');
  });

  it('renders several spans in source order', () => {
    const html = markSpans(TEXT, [
      { span: { line: 3, column: 1, end_line: 3, end_column: 2 }, cls: 'b' },
      { span: { line: 1, column: 1, end_line: 1, end_column: 5 }, cls: 'a' },
    ]);
    const first = html.indexOf('<mark class="a">func</mark>');
    const second = html.indexOf('<mark class="b">}</mark>');
    expect(first).toBeGreaterThanOrEqual(0);
    expect(second).toBeGreaterThan(first);
  });

  it('clips a span that overlaps an earlier one', () => {
    const html = markSpans('abcdef', [
      { span: { line: 1, column: 1, end_line: 1, end_column: 5 }, cls: 'a' },
      { span: { line: 1, column: 3, end_line: 1, end_column: 7 }, cls: 'b' },
    ]);
    expect(html).toBe('<mark class="a">abcd</mark><mark class="b">ef</mark>');
  });

  it('returns escaped text when there is nothing to mark', () => {
    expect(markSpans('a<b', [])).toBe('a&lt;b');
  });
});

describe('gutter', () => {
  it('numbers every line', () => {
    expect(gutter('one\ntwo\nthree')).toBe('1\n2\n3');
    expect(gutter(TEXT)).toBe('1\n2\n3\n4');
  });
});
