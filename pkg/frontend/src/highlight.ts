// Source pane markup. Evidence spans come from the service as 1-based
// line/column pairs with exclusive ends; everything here just converts
// them to offsets and wraps the covered text in <mark> tags. No parsing
// happens on the client.

import { Span } from './api';

export function escHtml(raw: string): string {
  return raw
    .replace(/&/g, '&amp;')
    .replace(/</g, '&lt;')
    .replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;');
}

// offset of the first character of each line, index 0 unused
export function lineStarts(text: string): number[] {
  const starts = [0, 0];
  for (let i = 0; i < text.length; i++) {
    if (text[i] === '\n') starts.push(i + 1);
  }
  return starts;
}

export function spanToRange(text: string, span: Span): [number, number] {
  const starts = lineStarts(text);
  const at = (line: number, column: number) => {
    if (line < 1) return 0;
    if (line >= starts.length) return text.length;
    return Math.min(starts[line] + column - 1, text.length);
  };
  const begin = at(span.line, span.column);
  const end = Math.max(begin, at(span.end_line, span.end_column));
  return [begin, end];
}

export interface MarkedSpan {
  span: Span;
  cls: string;
}

export function markSpans(text: string, marks: MarkedSpan[]): string {
  const ranges = marks
    .map((m) => ({ range: spanToRange(text, m.span), cls: m.cls }))
    .filter((m) => m.range[1] > m.range[0])
    .sort((a, b) => a.range[0] - b.range[0]);
  const parts: string[] = [];
  let cursor = 0;
  for (const { range, cls } of ranges) {
    const begin = Math.max(range[0], cursor);
    const end = Math.max(range[1], begin);
    if (begin >= end) continue; // swallowed by an earlier mark
    parts.push(escHtml(text.slice(cursor, begin)));
    parts.push(`<mark class="${cls}">${escHtml(text.slice(begin, end))}</mark>`);
    cursor = end;
  }
  parts.push(escHtml(text.slice(cursor)));
  return parts.join('');
}

export function gutter(text: string): string {
  const lines = text.split('\n').length;
  const numbers = [];
  for (let n = 1; n <= lines; n++) numbers.push(String(n));
  return numbers.join('\n');
}
