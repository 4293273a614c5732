// HTML builders for the three panes. These are deliberately dumb: the
// service already orders sites and computes status, score and timing,
// so the client renders arrays in the order they arrive and never
// re-derives any of it.

import { Defect, Question, Site, SiteEvidence, Timing } from './api';
import { escHtml } from './highlight';

export function statusLabel(status: string): string {
  return status.replace(/_/g, ' ');
}

export function formatMinutes(minutes: number): string {
  return `${minutes.toFixed(1)} min`;
}

function evidenceLine(item: SiteEvidence): string {
  if (item.fact) {
    const args = item.fact.args.map(escHtml).join(', ');
    return `<li class="ev-${item.kind}">${item.kind} fact: ${escHtml(item.fact.name)}(${args})</li>`;
  }
  return `<li class="ev-${item.kind}">${item.kind}: ${escHtml(item.note ?? '')}</li>`;
}

function bindingLine(binding: Record<string, string>): string {
  const pairs = Object.entries(binding)
    .map(([name, value]) => `${escHtml(name)}=${escHtml(value)}`)
    .join(', ');
  return pairs ? `<span class="binding">${pairs}</span>` : '';
}

export function siteCard(site: Site, rank: number, selected: boolean): string {
  const classes = ['site-card', `status-${site.status}`];
  if (selected) classes.push('selected');
  const questions = site.pending_questions.length
    ? `<span class="open-questions">${site.pending_questions.length} open</span>`
    : '';
  return (
    `<article class="${classes.join(' ')}" data-key="${escHtml(site.key)}">` +
    `<header><span class="rank">S${rank}</span>` +
    `<span class="status">${escHtml(statusLabel(site.status))}</span>` +
    `<span class="severity sev-${site.severity}">${escHtml(site.severity)}</span>${questions}</header>` +
    `<div class="scenario">${escHtml(site.scenario)} ${bindingLine(site.binding)}</div>` +
    (site.message ? `<p class="message">${escHtml(site.message)}</p>` : '') +
    `<ul class="evidence">${site.evidence.map(evidenceLine).join('')}</ul>` +
    `<button data-action="dismiss" data-site="${escHtml(site.key)}">dismiss</button>` +
    `</article>`
  );
}

export function questionItem(question: Question): string {
  const buttons = question.answer_domain
    .map(
      (answer) =>
        `<button data-action="answer" data-qid="${escHtml(question.id)}"` +
        ` data-answer="${escHtml(answer)}">${escHtml(answer)}</button>`,
    )
    .join('');
  return (
    `<li class="question" data-qid="${escHtml(question.id)}">` +
    `<p>${escHtml(question.text)}</p>` +
    `<div class="site-ref">${escHtml(question.site)}</div>` +
    `<div class="answer-buttons">${buttons}</div></li>`
  );
}

export function overwritePrompt(questionId: string, answer: string): string {
  return (
    `<div class="overwrite-prompt">` +
    `<p>This question already has a different answer. Replace it with ` +
    `'${escHtml(answer)}'?</p>` +
    `<button data-action="confirm-overwrite" data-qid="${escHtml(questionId)}"` +
    ` data-answer="${escHtml(answer)}">replace</button>` +
    `<button data-action="cancel-overwrite">keep existing</button></div>`
  );
}

export function answerRow([questionId, answer]: [string, string]): string {
  return `<li><code>${escHtml(questionId)}</code> → ${escHtml(answer)}</li>`;
}

export function defectRow(defect: Defect): string {
  const badge = defect.targeted
    ? '<span class="badge targeted">targeted</span>'
    : '<span class="badge other">other</span>';
  const site = defect.linked_site
    ? ` <span class="site-ref">${escHtml(defect.linked_site)}</span>`
    : '';
  return (
    `<li class="defect">${escHtml(defect.id)} ${badge} at ` +
    `${formatMinutes(defect.minutes_from_start)}${site}: ` +
    `${escHtml(defect.description)}</li>`
  );
}

export function timingView(timing: Timing): string {
  const targeted = Object.entries(timing.targeted_minutes)
    .map(([id, minutes]) => `<li>targeted ${escHtml(id)}: ${formatMinutes(minutes)}</li>`)
    .join('');
  const mean =
    timing.mean_other_minutes === null
      ? '<li class="mean-other">no other defects</li>'
      : `<li class="mean-other">mean time for other defects: ` +
        `${formatMinutes(timing.mean_other_minutes)}</li>`;
  return `<ul class="timing">${targeted || '<li>no targeted defects</li>'}${mean}</ul>`;
}
